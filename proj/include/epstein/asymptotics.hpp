#pragma once

#include "epstein/foliation.hpp"

namespace epstein {

/// Derivative at 0 of the scaling function in the eps = -k parametrization;
/// both families scale by 1/c(k), giving 1/4.
inline constexpr double kScaleDerivativeAtZero = 0.25;

struct FormsSample {
    double eps;
    SymTwoTensor I_eps;
    SymTwoTensor II_eps;
};

/// Rescaled fundamental forms along a solved branch:
/// I_eps = 4 f'(0) eps I(sigma(eps)), II_eps = -4 f'(0) eps II(sigma(eps)),
/// with sigma(eps) = c(-eps) tau_{-eps}. Both tend to h as eps -> 0.
inline std::vector<FormsSample> rescaled_forms(const FoliationBranch& branch, const ModelSurface& S,
                                               double max_residual = 1e-8) {
    std::vector<FormsSample> out;
    out.reserve(branch.samples.size());
    for (const BranchSample& sample : branch.samples) {
        if (!(sample.residual_sup <= max_residual))
            throw std::invalid_argument("rescaled_forms: branch entry is not converged");
        const double eps = -sample.k;
        const ConformalMetricField tau = scaled_metric_from(S, sample.u);
        const ConformalMetricField sigma = unscale(branch.mode, sample.k, tau);
        const Field<double> K = gauss_curvature(sigma);
        const QuadDifferential B = intrinsic_B(sigma, S);
        const double scale = 4.0 * kScaleDerivativeAtZero * eps;
        SymTwoTensor I = first_form(sigma, B, K);
        SymTwoTensor II = second_form(sigma, B, K);
        for (size_t n = 0; n < I.f.size(); ++n) {
            I.f.v[n] *= scale;
            I.q.v[n] *= scale;
            II.f.v[n] *= -scale;
            II.q.v[n] *= -scale;
        }
        out.push_back({eps, std::move(I), std::move(II)});
    }
    return out;
}

/// Difference quotients (T(eps) - T0)/eps extrapolated to eps = 0 by Neville
/// polynomial extrapolation across the sampled ladder. The recorded order is
/// the polynomial degree used.
inline SymTwoTensor tangent_estimate(const std::vector<std::pair<double, SymTwoTensor>>& seq,
                                     const SymTwoTensor& T0, int* extrapolation_order = nullptr) {
    if (seq.size() < 3) throw std::invalid_argument("tangent_estimate: need at least 3 samples");
    const size_t m = seq.size();
    std::vector<double> x(m);
    std::vector<SymTwoTensor> P;
    P.reserve(m);
    for (size_t n = 0; n < m; ++n) {
        x[n] = seq[n].first;
        if (!(x[n] > 0.0)) throw std::invalid_argument("tangent_estimate: eps values must be positive");
        if (!seq[n].second.f.same_shape(T0.f))
            throw std::invalid_argument("tangent_estimate: tensors on different grids");
        P.push_back(tensor_lincomb(1.0 / x[n], seq[n].second, -1.0 / x[n], T0));
    }
    for (size_t lev = 1; lev < m; ++lev)
        for (size_t n = 0; n + lev < m; ++n) {
            const double a = x[n + lev] / (x[n + lev] - x[n]);
            const double b = -x[n] / (x[n + lev] - x[n]);
            P[n] = tensor_lincomb(a, P[n], b, P[n + 1]);
        }
    if (extrapolation_order) *extrapolation_order = static_cast<int>(m) - 1;
    return P[0];
}

struct PhiCoefficients {
    double c_re = 0.0;
    double c_im = 0.0;
    double trace_part_norm = 0.0;
    double residual_norm = 0.0;
};

/// Least-squares coefficients of a tensor on span{Re phi, Im phi} in the
/// L^2(h) pairing, after removing the pure-trace part (the |dz|^2 component,
/// which is pointwise orthogonal to the dz^2 span). With phi identically
/// zero the coefficients are zero and the residual is the full trace-free
/// norm.
inline PhiCoefficients phi_coefficient(const SymTwoTensor& T, const ModelSurface& S) {
    if (!T.grid.same_chart(S.grid)) throw std::invalid_argument("phi_coefficient: grid mismatch");
    const SymTwoTensor re_phi = re_part(S.phi);
    const SymTwoTensor im_phi = im_part(S.phi);
    const SymTwoTensor trace{T.grid, T.f, Field<Complex>(T.grid)};
    const SymTwoTensor trace_free{T.grid, Field<double>(T.grid), T.q};

    PhiCoefficients out;
    out.trace_part_norm = l2_norm(trace, S.h);
    if (max_abs(S.phi.q) == 0.0) {
        out.residual_norm = l2_norm(trace_free, S.h);
        return out;
    }
    const double gram_re = pairing(re_phi, re_phi, S.h);
    const double gram_im = pairing(im_phi, im_phi, S.h);
    // Re phi and Im phi are orthogonal in this pairing with equal norms, so
    // the Gram matrix is diagonal; it degenerates only for phi = 0.
    if (!(gram_re > 0.0) || !(gram_im > 0.0) || !std::isfinite(gram_re) || !std::isfinite(gram_im))
        throw std::domain_error("phi_coefficient: degenerate phi span");
    out.c_re = pairing(trace_free, re_phi, S.h) / gram_re;
    out.c_im = pairing(trace_free, im_phi, S.h) / gram_im;
    SymTwoTensor rem = tensor_lincomb(1.0, trace_free, -out.c_re, re_phi);
    rem = tensor_lincomb(1.0, rem, -out.c_im, im_phi);
    out.residual_norm = l2_norm(rem, S.h);
    return out;
}

/// Verification record for the tangent behavior of a branch. Coefficients
/// are reported in the d/dk convention at k = 0-, i.e. the eps-derivative
/// times dk/deps = -1; the predicted values are -1 for the first form and 0
/// for the second in both modes.
struct TangentReport {
    FoliationMode mode = FoliationMode::KSurface;
    std::vector<double> eps_list;
    double cI_re = 0.0, cI_im = 0.0;
    double cII_re = 0.0, cII_im = 0.0;
    double residual_norm_I = 0.0, residual_norm_II = 0.0;
    double trace_norm_I = 0.0, trace_norm_II = 0.0;
    int extrapolation_order = 0;
    double predicted_cI_re = -1.0;
    double predicted_cII = 0.0;
    /// Per-sample single-quotient coefficients (eps, cI_re, cI_im, cII_re,
    /// cII_im), same sign convention; shows the convergence trend.
    std::vector<std::array<double, 5>> per_eps;
};

inline TangentReport verify_asymptotics(const FoliationBranch& branch, const ModelSurface& S) {
    const std::vector<FormsSample> forms = rescaled_forms(branch, S);
    if (forms.size() < 3) throw std::invalid_argument("verify_asymptotics: need at least 3 samples");
    const SymTwoTensor h_tensor = metric_tensor(S.h);

    // The branch ascends in k toward 0, so eps = -k is strictly decreasing
    // in branch order already.
    std::vector<std::pair<double, SymTwoTensor>> seq_I, seq_II;
    TangentReport rep;
    rep.mode = branch.mode;
    for (const FormsSample& fs : forms) {
        rep.eps_list.push_back(fs.eps);
        seq_I.emplace_back(fs.eps, fs.I_eps);
        seq_II.emplace_back(fs.eps, fs.II_eps);
    }
    for (size_t n = 1; n < rep.eps_list.size(); ++n)
        if (!(rep.eps_list[n] < rep.eps_list[n - 1]))
            throw std::invalid_argument("verify_asymptotics: eps ladder must be strictly decreasing");

    const SymTwoTensor TI = tangent_estimate(seq_I, h_tensor, &rep.extrapolation_order);
    const SymTwoTensor TII = tangent_estimate(seq_II, h_tensor, nullptr);
    const PhiCoefficients cI = phi_coefficient(TI, S);
    const PhiCoefficients cII = phi_coefficient(TII, S);
    rep.cI_re = -cI.c_re;
    rep.cI_im = -cI.c_im;
    rep.cII_re = -cII.c_re;
    rep.cII_im = -cII.c_im;
    rep.residual_norm_I = cI.residual_norm;
    rep.residual_norm_II = cII.residual_norm;
    rep.trace_norm_I = cI.trace_part_norm;
    rep.trace_norm_II = cII.trace_part_norm;
    for (const FormsSample& fs : forms) {
        const SymTwoTensor DI = tensor_lincomb(1.0 / fs.eps, fs.I_eps, -1.0 / fs.eps, h_tensor);
        const SymTwoTensor DII = tensor_lincomb(1.0 / fs.eps, fs.II_eps, -1.0 / fs.eps, h_tensor);
        const PhiCoefficients pI = phi_coefficient(DI, S);
        const PhiCoefficients pII = phi_coefficient(DII, S);
        rep.per_eps.push_back({fs.eps, -pI.c_re, -pI.c_im, -pII.c_re, -pII.c_im});
    }
    return rep;
}

}  // namespace epstein
