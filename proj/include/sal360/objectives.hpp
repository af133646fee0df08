#pragma once

#include <cmath>
#include <vector>

#include "sal360/errors.hpp"
#include "sal360/sphere_geom.hpp"

// The four training losses and their analytic gradients with respect to the
// predicted map: L = L_CC + L_KL + L_SMSE + L_BCE (unit weights).

namespace sal360 {

constexpr double kLossEps = 1e-7;  // KL distribution smoothing and BCE clamp

struct LossResult {
    double value = 0.0;
    SaliencyMap grad;  // d value / d pred, same grid as the inputs
};

struct LossBreakdown {
    double cc_term = 0.0;
    double kl_term = 0.0;
    double smse_term = 0.0;
    double bce_term = 0.0;
    double total = 0.0;
};

namespace detail {

inline void require_same_grid(const SaliencyMap& a, const SaliencyMap& b, const char* who) {
    if (!(a.grid == b.grid)) throw input_error(std::string(who) + ": grid mismatch");
}

}  // namespace detail

// 1 - Pearson correlation over all pixels, in [0, 2].
inline LossResult loss_cc(const SaliencyMap& pred, const SaliencyMap& gt) {
    detail::require_same_grid(pred, gt, "loss_cc");
    const std::size_t n = pred.v.size();
    double mp = 0.0, mg = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mp += pred.v[i];
        mg += gt.v[i];
    }
    mp /= double(n);
    mg /= double(n);
    double spp = 0.0, sgg = 0.0, spg = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = pred.v[i] - mp;
        const double b = gt.v[i] - mg;
        spp += a * a;
        sgg += b * b;
        spg += a * b;
    }
    if (spp <= 0.0 || sgg <= 0.0)
        throw degenerate_error("loss_cc: zero-variance map");
    const double denom = std::sqrt(spp * sgg);
    const double cc = spg / denom;
    LossResult r;
    r.value = 1.0 - cc;
    r.grad = SaliencyMap(pred.grid);
    // dCC/dp_i = (b_i - (spg/spp) a_i) / sqrt(spp*sgg); loss negates it.
    const double ratio = spg / spp;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = pred.v[i] - mp;
        const double b = gt.v[i] - mg;
        r.grad.v[i] = -(b - ratio * a) / denom;
    }
    return r;
}

// KL(gt || pred) with both maps normalized by (sum + eps) and eps inside
// the log denominator.
inline LossResult loss_kl(const SaliencyMap& pred, const SaliencyMap& gt) {
    detail::require_same_grid(pred, gt, "loss_kl");
    const std::size_t n = pred.v.size();
    double sp = 0.0, sg = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sp += pred.v[i];
        sg += gt.v[i];
    }
    if (sg <= 0.0) throw degenerate_error("loss_kl: all-zero ground truth");
    const double inv_sp = 1.0 / (sp + kLossEps);
    const double inv_sg = 1.0 / (sg + kLossEps);
    LossResult r;
    r.grad = SaliencyMap(pred.grid);
    double value = 0.0;
    double dot = 0.0;  // sum_j g_dj * p_dj / (p_dj + eps)
    for (std::size_t i = 0; i < n; ++i) {
        const double gd = gt.v[i] * inv_sg;
        const double pd = pred.v[i] * inv_sp;
        if (gd > 0.0) value += gd * std::log(gd / (pd + kLossEps));
        dot += gd * pd / (pd + kLossEps);
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double gd = gt.v[i] * inv_sg;
        const double pd = pred.v[i] * inv_sp;
        r.grad.v[i] = inv_sp * (dot - gd / (pd + kLossEps));
    }
    r.value = value;
    return r;
}

// Latitude-weighted mean squared error: sum psi (pred-gt)^2 / sum psi.
inline LossResult loss_smse(const SaliencyMap& pred, const SaliencyMap& gt,
                            const LatitudeWeightGrid& weights) {
    detail::require_same_grid(pred, gt, "loss_smse");
    if (weights.size() != std::size_t(pred.grid.height))
        throw input_error("loss_smse: weight grid does not match map height");
    const int W = pred.grid.width, H = pred.grid.height;
    double wsum = 0.0;
    for (int y = 0; y < H; ++y) wsum += weights[y] * W;
    LossResult r;
    r.grad = SaliencyMap(pred.grid);
    double value = 0.0;
    for (int y = 0; y < H; ++y) {
        const double psi = weights[y];
        for (int x = 0; x < W; ++x) {
            const double e = pred.at(x, y) - gt.at(x, y);
            value += psi * e * e;
            r.grad.at(x, y) = 2.0 * psi * e / wsum;
        }
    }
    r.value = value / wsum;
    return r;
}

// Mean binary cross entropy with pred clamped to [eps, 1-eps]; gradient is
// zero where the clamp is active.
inline LossResult loss_bce(const SaliencyMap& pred, const SaliencyMap& gt) {
    detail::require_same_grid(pred, gt, "loss_bce");
    const std::size_t n = pred.v.size();
    LossResult r;
    r.grad = SaliencyMap(pred.grid);
    double value = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double p_raw = pred.v[i];
        const double p = std::clamp(p_raw, kLossEps, 1.0 - kLossEps);
        const double g = gt.v[i];
        value += -(g * std::log(p) + (1.0 - g) * std::log(1.0 - p));
        const bool clamped = p_raw < kLossEps || p_raw > 1.0 - kLossEps;
        r.grad.v[i] = clamped ? 0.0 : (-g / p + (1.0 - g) / (1.0 - p)) / double(n);
    }
    r.value = value / double(n);
    return r;
}

// Sum of the four losses; gradient is the sum of gradients.
inline std::pair<LossBreakdown, SaliencyMap> loss_total(const SaliencyMap& pred,
                                                        const SaliencyMap& gt,
                                                        const LatitudeWeightGrid& weights) {
    const LossResult cc = loss_cc(pred, gt);
    const LossResult kl = loss_kl(pred, gt);
    const LossResult smse = loss_smse(pred, gt, weights);
    const LossResult bce = loss_bce(pred, gt);
    LossBreakdown b;
    b.cc_term = cc.value;
    b.kl_term = kl.value;
    b.smse_term = smse.value;
    b.bce_term = bce.value;
    b.total = cc.value + kl.value + smse.value + bce.value;
    SaliencyMap grad(pred.grid);
    for (std::size_t i = 0; i < grad.v.size(); ++i)
        grad.v[i] = cc.grad.v[i] + kl.grad.v[i] + smse.grad.v[i] + bce.grad.v[i];
    return {b, std::move(grad)};
}

}  // namespace sal360
