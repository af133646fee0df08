#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sal360/errors.hpp"
#include "sal360/sphere_geom.hpp"

// Conversion of raw viewing traces into per-frame ground-truth saliency maps,
// following the two dataset pipelines: angular fixations splatted with a
// great-circle Gaussian, and normalized fixations splatted in pixel space and
// smoothed on the cubemap.

namespace sal360 {

struct NormalizedPoint {
    double u = 0.0;  // in [0, 1]
    double v = 0.0;
};

enum class CoordinateKind { angular, normalized };

struct TraceSample {
    double timestamp = 0.0;  // seconds
    double a = 0.0;          // lon (rad) or u
    double b = 0.0;          // lat (rad) or v

    SphericalPoint spherical() const { return {a, b}; }
    NormalizedPoint normalized() const { return {a, b}; }
};

struct FixationTrace {
    std::string user_id;
    CoordinateKind kind = CoordinateKind::angular;
    std::vector<TraceSample> samples;  // timestamps strictly increasing
};

// Binary per-pixel fixation mask (any number of hits in a pixel counts once).
struct FixationMap {
    EquirectGrid grid;
    std::vector<std::uint8_t> hits;

    FixationMap() = default;
    explicit FixationMap(EquirectGrid g) : grid(g), hits(g.pixel_count(), 0) {}

    void mark(int x, int y) { hits[std::size_t(y) * grid.width + x] = 1; }
    bool at(int x, int y) const { return hits[std::size_t(y) * grid.width + x] != 0; }
    std::size_t hit_count() const {
        std::size_t n = 0;
        for (auto h : hits) n += h;
        return n;
    }
};

// One sample per frame index, each chosen as the trace sample nearest the
// frame timestamp (ties resolve to the earlier sample).
inline std::vector<TraceSample> downsample_trace(const FixationTrace& trace, double trace_rate,
                                                 double frame_rate) {
    if (!(frame_rate > 0.0) || trace_rate < frame_rate)
        throw input_error("downsample_trace: need trace_rate >= frame_rate > 0");
    if (trace.samples.empty()) throw data_error("downsample_trace: empty trace");
    for (std::size_t i = 1; i < trace.samples.size(); ++i)
        if (!(trace.samples[i].timestamp > trace.samples[i - 1].timestamp))
            throw data_error("downsample_trace: timestamps not strictly increasing");

    const double last_t = trace.samples.back().timestamp;
    const int frame_count = int(std::floor(last_t * frame_rate)) + 1;
    std::vector<TraceSample> out;
    out.reserve(frame_count);
    std::size_t lo = 0;
    for (int f = 0; f < frame_count; ++f) {
        const double tf = f / frame_rate;
        while (lo + 1 < trace.samples.size() && trace.samples[lo + 1].timestamp <= tf) ++lo;
        // candidates: lo (<= tf, or first sample) and lo+1 (> tf)
        std::size_t pick = lo;
        if (lo + 1 < trace.samples.size()) {
            const double d0 = std::fabs(tf - trace.samples[lo].timestamp);
            const double d1 = std::fabs(trace.samples[lo + 1].timestamp - tf);
            if (d1 < d0) pick = lo + 1;
        }
        out.push_back(trace.samples[pick]);
    }
    return out;
}

namespace detail {

// Adds one great-circle Gaussian into an accumulator map; shared by
// angular_gaussian and splat_angular so superposition holds bit-for-bit.
inline void add_angular_gaussian(SaliencyMap& acc, const GridTrig& trig,
                                 const SphericalPoint& center, double inv2s2) {
    const auto c = unit_vector(center);
    const EquirectGrid& grid = acc.grid;
    for (int y = 0; y < grid.height; ++y) {
        const double clat = trig.cos_lat[y];
        const double zc = trig.sin_lat[y] * c[2];
        double* row = acc.v.data() + std::size_t(y) * grid.width;
        for (int x = 0; x < grid.width; ++x) {
            const double dot = clat * (trig.cos_lon[x] * c[0] + trig.sin_lon[x] * c[1]) + zc;
            const double d = std::acos(std::clamp(dot, -1.0, 1.0));
            row[x] += std::exp(-d * d * inv2s2);
        }
    }
}

}  // namespace detail

// Sum of angular Gaussians over the given fixation points (empty -> zero map).
inline SaliencyMap splat_angular(std::span<const SphericalPoint> points, const EquirectGrid& grid,
                                 double sigma_deg) {
    if (!(sigma_deg > 0.0)) throw input_error("splat_angular: sigma must be positive");
    const double sigma = sigma_deg * M_PI / 180.0;
    const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
    const GridTrig trig(grid);
    SaliencyMap out(grid);
    for (const auto& p : points) detail::add_angular_gaussian(out, trig, p, inv2s2);
    return out;
}

// Per-face separable Gaussian blur with replicate borders; sigma in pixels.
inline void blur_cubemap_faces(CubemapFaceSet& faces, double sigma_px) {
    if (!(sigma_px > 0.0)) return;
    const int F = faces.face_size;
    const int radius = std::max(1, int(std::ceil(3.0 * sigma_px)));
    std::vector<double> kernel(2 * radius + 1);
    double ksum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        kernel[i + radius] = std::exp(-0.5 * (i * i) / (sigma_px * sigma_px));
        ksum += kernel[i + radius];
    }
    for (auto& k : kernel) k /= ksum;

    std::vector<double> tmp(std::size_t(F) * F);
    for (auto& face : faces.faces) {
        // horizontal pass
        for (int j = 0; j < F; ++j) {
            for (int i = 0; i < F; ++i) {
                double acc = 0.0;
                for (int k = -radius; k <= radius; ++k) {
                    const int ii = std::clamp(i + k, 0, F - 1);
                    acc += kernel[k + radius] * face[std::size_t(j) * F + ii];
                }
                tmp[std::size_t(j) * F + i] = acc;
            }
        }
        // vertical pass
        for (int j = 0; j < F; ++j) {
            for (int i = 0; i < F; ++i) {
                double acc = 0.0;
                for (int k = -radius; k <= radius; ++k) {
                    const int jj = std::clamp(j + k, 0, F - 1);
                    acc += kernel[k + radius] * tmp[std::size_t(jj) * F + i];
                }
                face[std::size_t(j) * F + i] = acc;
            }
        }
    }
}

// Normalized-coordinate pipeline: pixel-space Gaussians (sigma_px chosen so
// the spread corresponds to the requested viewing angle on the longitude
// span), then cubemap smoothing and re-projection.
inline SaliencyMap splat_normalized_cubemap(std::span<const NormalizedPoint> points,
                                            const EquirectGrid& grid, double sigma_deg,
                                            int face_size) {
    if (!(sigma_deg > 0.0))
        throw input_error("splat_normalized_cubemap: sigma must be positive");
    if (face_size < 1)
        throw input_error("splat_normalized_cubemap: face_size must be positive");
    for (const auto& p : points)
        if (!(p.u >= 0.0 && p.u <= 1.0 && p.v >= 0.0 && p.v <= 1.0))
            throw data_error("splat_normalized_cubemap: point outside [0,1]^2");

    const double sigma_px = sigma_deg / 360.0 * grid.width;
    const double inv2s2 = 1.0 / (2.0 * sigma_px * sigma_px);
    SaliencyMap plane(grid);
    for (const auto& p : points) {
        const double cx = p.u * grid.width - 0.5;
        const double cy = p.v * grid.height - 0.5;
        for (int y = 0; y < grid.height; ++y) {
            const double dy = y - cy;
            double* row = plane.v.data() + std::size_t(y) * grid.width;
            for (int x = 0; x < grid.width; ++x) {
                double dx = std::fabs(x - cx);
                dx = std::min(dx, grid.width - dx);  // wrap across the seam
                row[x] += std::exp(-(dx * dx + dy * dy) * inv2s2);
            }
        }
    }

    CubemapFaceSet faces = equirect_to_cubemap(plane, face_size);
    blur_cubemap_faces(faces, sigma_px * face_size / grid.width);
    return cubemap_to_equirect(faces, grid);
}

// Scale to [0, 1] by the map maximum; the all-zero map passes through.
inline SaliencyMap normalize_map(const SaliencyMap& map) {
    double maxv = 0.0;
    for (double x : map.v) {
        if (!std::isfinite(x) || x < 0.0)
            throw data_error("normalize_map: values must be finite and non-negative");
        maxv = std::max(maxv, x);
    }
    SaliencyMap out = map;
    if (maxv > 0.0)
        for (auto& x : out.v) x /= maxv;
    return out;
}

inline FixationMap build_fixation_map(std::span<const SphericalPoint> points,
                                      const EquirectGrid& grid) {
    FixationMap out(grid);
    for (const auto& p : points) {
        auto [x, y] = sphere_to_pixel(grid, p);
        out.mark(x, y);
    }
    return out;
}

inline FixationMap build_fixation_map(std::span<const NormalizedPoint> points,
                                      const EquirectGrid& grid) {
    FixationMap out(grid);
    for (const auto& p : points) {
        if (!(p.u >= 0.0 && p.u <= 1.0 && p.v >= 0.0 && p.v <= 1.0))
            throw data_error("build_fixation_map: point outside [0,1]^2");
        const int x = std::clamp(int(std::floor(p.u * grid.width)), 0, grid.width - 1);
        const int y = std::clamp(int(std::floor(p.v * grid.height)), 0, grid.height - 1);
        out.mark(x, y);
    }
    return out;
}

}  // namespace sal360
