#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "sal360/errors.hpp"
#include "sal360/gt_pipeline.hpp"
#include "sal360/sphere_geom.hpp"

// Evaluation metrics under latitudinal sinusoidal weighting: CC and NSS use
// psi-weighted moments, KL uses psi-reweighted distributions, AUC-Judd uses
// psi-weighted false-positive mass. Fixations themselves are point events
// and are never weighted.

namespace sal360 {

constexpr double kMetricEps = 1e-7;

struct MetricReport {
    double cc = 0.0;
    double nss = 0.0;
    double kl = 0.0;
    double auc_judd = 0.0;
    int frame_count = 0;     // frames that produced at least one defined metric
    int excluded_cc = 0;     // per-metric counts of undefined frames
    int excluded_nss = 0;
    int excluded_kl = 0;
    int excluded_auc = 0;
};

namespace detail {

struct WeightedMoments {
    double mean = 0.0;
    double var = 0.0;  // population variance
};

inline WeightedMoments weighted_moments(const SaliencyMap& m, const LatitudeWeightGrid& psi) {
    const int W = m.grid.width, H = m.grid.height;
    double wsum = 0.0, s1 = 0.0;
    for (int y = 0; y < H; ++y) {
        const double w = psi[y];
        wsum += w * W;
        for (int x = 0; x < W; ++x) s1 += w * m.at(x, y);
    }
    WeightedMoments out;
    out.mean = s1 / wsum;
    double s2 = 0.0;
    for (int y = 0; y < H; ++y) {
        const double w = psi[y];
        for (int x = 0; x < W; ++x) {
            const double d = m.at(x, y) - out.mean;
            s2 += w * d * d;
        }
    }
    out.var = s2 / wsum;
    return out;
}

inline void require_same_grid(const SaliencyMap& a, const SaliencyMap& b, const char* who) {
    if (!(a.grid == b.grid)) throw input_error(std::string(who) + ": grid mismatch");
}

inline void require_psi(const SaliencyMap& m, const LatitudeWeightGrid& psi, const char* who) {
    if (psi.size() != std::size_t(m.grid.height))
        throw input_error(std::string(who) + ": weight grid does not match map height");
}

}  // namespace detail

// Weighted Pearson correlation between two maps.
inline double metric_cc(const SaliencyMap& pred, const SaliencyMap& gt,
                        const LatitudeWeightGrid& psi) {
    detail::require_same_grid(pred, gt, "metric_cc");
    detail::require_psi(pred, psi, "metric_cc");
    const auto mp = detail::weighted_moments(pred, psi);
    const auto mg = detail::weighted_moments(gt, psi);
    if (mp.var <= 0.0 || mg.var <= 0.0)
        throw degenerate_error("metric_cc: zero weighted variance");
    const int W = pred.grid.width, H = pred.grid.height;
    double cov = 0.0, wsum = 0.0;
    for (int y = 0; y < H; ++y) {
        const double w = psi[y];
        wsum += w * W;
        for (int x = 0; x < W; ++x)
            cov += w * (pred.at(x, y) - mp.mean) * (gt.at(x, y) - mg.mean);
    }
    cov /= wsum;
    return cov / std::sqrt(mp.var * mg.var);
}

// Mean weighted z-score of the prediction at fixated pixels.
inline double metric_nss(const SaliencyMap& pred, const FixationMap& fixations,
                         const LatitudeWeightGrid& psi) {
    if (!(pred.grid == fixations.grid)) throw input_error("metric_nss: grid mismatch");
    detail::require_psi(pred, psi, "metric_nss");
    const auto m = detail::weighted_moments(pred, psi);
    if (m.var <= 0.0) throw degenerate_error("metric_nss: zero weighted variance");
    const double inv_std = 1.0 / std::sqrt(m.var);
    double acc = 0.0;
    std::size_t count = 0;
    for (int y = 0; y < pred.grid.height; ++y)
        for (int x = 0; x < pred.grid.width; ++x)
            if (fixations.at(x, y)) {
                acc += (pred.at(x, y) - m.mean) * inv_std;
                ++count;
            }
    if (count == 0) throw degenerate_error("metric_nss: no fixations");
    return acc / double(count);
}

// KL(gt || pred) on psi-reweighted, renormalized distributions.
inline double metric_kl(const SaliencyMap& pred, const SaliencyMap& gt,
                        const LatitudeWeightGrid& psi) {
    detail::require_same_grid(pred, gt, "metric_kl");
    detail::require_psi(pred, psi, "metric_kl");
    const int W = pred.grid.width, H = pred.grid.height;
    double sp = 0.0, sg = 0.0;
    for (int y = 0; y < H; ++y) {
        const double w = psi[y];
        for (int x = 0; x < W; ++x) {
            sp += w * pred.at(x, y);
            sg += w * gt.at(x, y);
        }
    }
    if (sg <= 0.0) throw degenerate_error("metric_kl: all-zero ground truth");
    const double inv_sp = 1.0 / (sp + kMetricEps);
    const double inv_sg = 1.0 / (sg + kMetricEps);
    double kl = 0.0;
    for (int y = 0; y < H; ++y) {
        const double w = psi[y];
        for (int x = 0; x < W; ++x) {
            const double gd = w * gt.at(x, y) * inv_sg;
            if (gd > 0.0) kl += gd * std::log(gd / (w * pred.at(x, y) * inv_sp + kMetricEps));
        }
    }
    return kl;
}

// AUC-Judd: thresholds are the saliency values at fixated pixels; the true
// positive rate counts fixations, the false positive rate is the psi-weighted
// mass of non-fixated pixels above threshold. Trapezoid area through the
// (0,0) and (1,1) anchors.
inline double metric_auc_judd(const SaliencyMap& pred, const FixationMap& fixations,
                              const LatitudeWeightGrid& psi) {
    if (!(pred.grid == fixations.grid)) throw input_error("metric_auc_judd: grid mismatch");
    detail::require_psi(pred, psi, "metric_auc_judd");
    std::vector<double> fix_vals;
    std::vector<std::pair<double, double>> bg;  // (value, weight) of non-fixated pixels
    for (int y = 0; y < pred.grid.height; ++y)
        for (int x = 0; x < pred.grid.width; ++x) {
            if (fixations.at(x, y))
                fix_vals.push_back(pred.at(x, y));
            else
                bg.emplace_back(pred.at(x, y), psi[y]);
        }
    if (fix_vals.empty()) throw degenerate_error("metric_auc_judd: no fixations");
    if (bg.empty()) throw degenerate_error("metric_auc_judd: no non-fixated pixels");

    // Sort background descending by value; prefix weights give FP mass >= v.
    std::sort(bg.begin(), bg.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<double> prefix_w(bg.size() + 1, 0.0);
    for (std::size_t i = 0; i < bg.size(); ++i) prefix_w[i + 1] = prefix_w[i] + bg[i].second;
    const double total_w = prefix_w.back();
    if (total_w <= 0.0) throw degenerate_error("metric_auc_judd: zero background weight");

    std::vector<double> thresholds = fix_vals;
    std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
    std::sort(fix_vals.begin(), fix_vals.end(), std::greater<>());

    std::vector<double> tp{0.0}, fp{0.0};
    for (std::size_t k = 0; k < thresholds.size(); ++k) {
        const double th = thresholds[k];
        // fixations with value >= th (fix_vals sorted descending)
        const auto fit = std::upper_bound(fix_vals.begin(), fix_vals.end(), th,
                                          [](double a, double b) { return a > b; });
        tp.push_back(double(fit - fix_vals.begin()) / double(fix_vals.size()));
        // background mass with value >= th
        const auto bit = std::upper_bound(
            bg.begin(), bg.end(), th,
            [](double a, const std::pair<double, double>& b) { return a > b.first; });
        fp.push_back(prefix_w[std::size_t(bit - bg.begin())] / total_w);
    }
    tp.push_back(1.0);
    fp.push_back(1.0);

    double area = 0.0;
    for (std::size_t i = 1; i < tp.size(); ++i)
        area += (fp[i] - fp[i - 1]) * (tp[i] + tp[i - 1]) * 0.5;
    return area;
}

// Per-frame metrics averaged over a sequence; frames where a metric is
// undefined are excluded from that metric's mean and counted.
inline MetricReport evaluate_frames(std::span<const SaliencyMap> preds,
                                    std::span<const SaliencyMap> gts,
                                    std::span<const FixationMap> fixations,
                                    const LatitudeWeightGrid& psi) {
    if (preds.size() != gts.size() || preds.size() != fixations.size())
        throw input_error("evaluate_frames: sequence length mismatch");
    MetricReport rep;
    double cc_sum = 0.0, nss_sum = 0.0, kl_sum = 0.0, auc_sum = 0.0;
    int cc_n = 0, nss_n = 0, kl_n = 0, auc_n = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        bool any = false;
        try {
            cc_sum += metric_cc(preds[i], gts[i], psi);
            ++cc_n;
            any = true;
        } catch (const degenerate_error&) {
            ++rep.excluded_cc;
        }
        try {
            nss_sum += metric_nss(preds[i], fixations[i], psi);
            ++nss_n;
            any = true;
        } catch (const degenerate_error&) {
            ++rep.excluded_nss;
        }
        try {
            kl_sum += metric_kl(preds[i], gts[i], psi);
            ++kl_n;
            any = true;
        } catch (const degenerate_error&) {
            ++rep.excluded_kl;
        }
        try {
            auc_sum += metric_auc_judd(preds[i], fixations[i], psi);
            ++auc_n;
            any = true;
        } catch (const degenerate_error&) {
            ++rep.excluded_auc;
        }
        if (any) ++rep.frame_count;
    }
    rep.cc = cc_n ? cc_sum / cc_n : 0.0;
    rep.nss = nss_n ? nss_sum / nss_n : 0.0;
    rep.kl = kl_n ? kl_sum / kl_n : 0.0;
    rep.auc_judd = auc_n ? auc_sum / auc_n : 0.0;
    return rep;
}

}  // namespace sal360
