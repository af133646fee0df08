#pragma once

#include <cmath>
#include <fstream>
#include <span>
#include <string>

#include "sal360/errors.hpp"
#include "sal360/gt_pipeline.hpp"
#include "sal360/io.hpp"
#include "sal360/sphere_geom.hpp"

// Viewing-center-bias prior: the CB map averaged from first-frame ground
// truth, the time-decaying fusion weight w_t = (1-beta) delta(t) + beta with
// delta(t) = exp(-alpha (t/C)^2), the fusion S = w_t CB + (1-w_t) S_init, and
// analytic gradients for the learnable alpha and beta.

namespace sal360 {

// Which components of the fusion weight are active. The reduced modes back
// the ablation grid; `full` is the shipping configuration.
enum class FusionMode { full, delta_only, beta_only, off };

struct CenterBiasModel {
    SaliencyMap cb_map;            // normalized to [0, 1]
    double alpha = 600.0;          // > 0, learnable
    double beta = 0.15;            // in [0, 1], learnable
    double c_const = 600.0;        // fixed time constant
    FusionMode mode = FusionMode::full;
};

// Element-wise mean of the first-frame ground-truth maps, then normalized.
inline SaliencyMap compute_cb_map(std::span<const SaliencyMap> first_frame_gt_maps) {
    if (first_frame_gt_maps.empty()) throw data_error("compute_cb_map: empty map list");
    const EquirectGrid grid = first_frame_gt_maps.front().grid;
    SaliencyMap acc(grid);
    for (const auto& m : first_frame_gt_maps) {
        if (!(m.grid == grid)) throw input_error("compute_cb_map: mismatched grids");
        for (std::size_t i = 0; i < acc.v.size(); ++i) acc.v[i] += m.v[i];
    }
    const double inv_n = 1.0 / double(first_frame_gt_maps.size());
    for (auto& x : acc.v) x *= inv_n;
    return normalize_map(acc);
}

inline double delta(double t, double alpha, double c_const) {
    if (t < 0.0) throw input_error("delta: t must be >= 0");
    const double r = t / c_const;
    return std::exp(-alpha * r * r);
}

// First integer frame index with delta(t) <= 0.5.
inline int delta_crossing_frame(double alpha, double c_const) {
    if (!(alpha > 0.0)) throw input_error("delta_crossing_frame: alpha must be positive");
    const double t_star = c_const * std::sqrt(std::log(2.0) / alpha);
    int t = std::max(0, int(std::floor(t_star)) - 2);
    while (delta(double(t), alpha, c_const) > 0.5) ++t;
    return t;
}

// w_t computed as delta + beta * (1 - delta), algebraically identical to
// (1 - beta) * delta + beta but exact at both endpoints: w_0 = 1 and
// w = beta once delta underflows to zero.
inline double fusion_weight(double t, const CenterBiasModel& model) {
    switch (model.mode) {
        case FusionMode::off:
            return 0.0;
        case FusionMode::beta_only:
            return model.beta;
        case FusionMode::delta_only:
            return delta(t, model.alpha, model.c_const);
        case FusionMode::full:
        default: {
            const double d = delta(t, model.alpha, model.c_const);
            return d + model.beta * (1.0 - d);
        }
    }
}

// S = w_t * CB + (1 - w_t) * S_init, element-wise.
inline SaliencyMap fuse(const SaliencyMap& s_init, double t, const CenterBiasModel& model) {
    if (!(s_init.grid == model.cb_map.grid)) throw input_error("fuse: grid mismatch");
    const double w = fusion_weight(t, model);
    const double one_minus_w = 1.0 - w;
    SaliencyMap out(s_init.grid);
    for (std::size_t i = 0; i < out.v.size(); ++i)
        out.v[i] = w * model.cb_map.v[i] + one_minus_w * s_init.v[i];
    return out;
}

struct CenterBiasGrad {
    double d_alpha = 0.0;
    double d_beta = 0.0;
};

// Chain rule through the fusion:
//   dL/dalpha = sum_px dL/dS * (CB - S_init) * dw/dalpha
//   dL/dbeta  = sum_px dL/dS * (CB - S_init) * dw/dbeta
// with dw/dalpha = (1-beta) delta * (-(t/C)^2) and dw/dbeta = 1 - delta.
inline CenterBiasGrad grad_alpha_beta(const SaliencyMap& loss_grad_wrt_s,
                                      const SaliencyMap& s_init, double t,
                                      const CenterBiasModel& model) {
    if (!(loss_grad_wrt_s.grid == s_init.grid) || !(s_init.grid == model.cb_map.grid))
        throw input_error("grad_alpha_beta: grid mismatch");
    double common = 0.0;
    for (std::size_t i = 0; i < s_init.v.size(); ++i)
        common += loss_grad_wrt_s.v[i] * (model.cb_map.v[i] - s_init.v[i]);
    const double d = delta(t, model.alpha, model.c_const);
    const double tc = t / model.c_const;
    CenterBiasGrad g;
    switch (model.mode) {
        case FusionMode::off:
            break;
        case FusionMode::beta_only:
            g.d_beta = common;
            break;
        case FusionMode::delta_only:
            g.d_alpha = common * d * -(tc * tc);
            break;
        case FusionMode::full:
        default:
            g.d_alpha = common * (1.0 - model.beta) * d * -(tc * tc);
            g.d_beta = common * (1.0 - d);
            break;
    }
    return g;
}

// CB model file: one text header line, then the map in the S360 format.
inline void save_cb_model(const std::string& path, const CenterBiasModel& model) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw data_error("save_cb_model: cannot open " + path);
    char buf[160];
    std::snprintf(buf, sizeof buf, "alpha=%.17g beta=%.17g c=%.17g\n", model.alpha, model.beta,
                  model.c_const);
    os << buf;
    write_s360(os, model.cb_map);
}

inline CenterBiasModel load_cb_model(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw data_error("load_cb_model: cannot open " + path);
    std::string header;
    std::getline(is, header);
    CenterBiasModel model;
    if (std::sscanf(header.c_str(), "alpha=%lg beta=%lg c=%lg", &model.alpha, &model.beta,
                    &model.c_const) != 3)
        throw data_error("load_cb_model: malformed header in " + path);
    model.cb_map = read_s360(is);
    return model;
}

}  // namespace sal360
