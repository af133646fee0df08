#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "sal360/errors.hpp"

// Equirectangular / spherical / cubemap coordinate machinery: the geometric
// substrate for ground-truth generation, losses and metrics.
//
// Conventions (frozen; the tests depend on them):
//   * pixel (x, y) covers longitude lambda = ((x+0.5)/W - 0.5) * 2*pi and
//     latitude phi = (0.5 - (y+0.5)/H) * pi  (pixel centers, y = 0 is north)
//   * unit embedding (cos phi cos lambda, cos phi sin lambda, sin phi)
//   * cubemap "front" face looks along (lambda = 0, phi = 0), right-handed

namespace sal360 {

struct EquirectGrid {
    int width = 0;   // longitude axis
    int height = 0;  // latitude axis

    EquirectGrid() = default;
    EquirectGrid(int w, int h) : width(w), height(h) {
        if (w < 2 || h < 1)
            throw input_error("EquirectGrid: need width >= 2, height >= 1");
    }

    bool operator==(const EquirectGrid&) const = default;

    std::size_t pixel_count() const { return std::size_t(width) * std::size_t(height); }

    double lon_at(int x) const { return ((x + 0.5) / width - 0.5) * 2.0 * M_PI; }
    double lat_at(int y) const { return (0.5 - (y + 0.5) / height) * M_PI; }
};

struct SphericalPoint {
    double lon = 0.0;  // radians in [-pi, pi)
    double lat = 0.0;  // radians in [-pi/2, pi/2]
};

inline std::array<double, 3> unit_vector(const SphericalPoint& p) {
    const double cl = std::cos(p.lat);
    return {cl * std::cos(p.lon), cl * std::sin(p.lon), std::sin(p.lat)};
}

// Dense map of reals over an equirectangular grid. Values are raw
// accumulations until normalize_map brings them to [0, 1].
struct SaliencyMap {
    EquirectGrid grid;
    std::vector<double> v;

    SaliencyMap() = default;
    explicit SaliencyMap(EquirectGrid g, double fill = 0.0)
        : grid(g), v(g.pixel_count(), fill) {}

    double& at(int x, int y) { return v[std::size_t(y) * grid.width + x]; }
    double at(int x, int y) const { return v[std::size_t(y) * grid.width + x]; }
};

// Per-row latitude weights (the sinusoidal factor used by losses/metrics);
// normalization is left to the consumer.
struct LatitudeWeightGrid {
    std::vector<double> w;  // one entry per row, in [0, 1]

    double operator[](std::size_t y) const { return w[y]; }
    std::size_t size() const { return w.size(); }
};

// Per-grid trig tables, mirrored so that the horizontal flip x -> W-1-x and
// the vertical flip y -> H-1-y are exact symmetries of every computation
// built on top of them (cos is shared, sin is negated bit-for-bit).
struct GridTrig {
    std::vector<double> cos_lon, sin_lon;  // per column
    std::vector<double> cos_lat, sin_lat;  // per row

    explicit GridTrig(const EquirectGrid& g)
        : cos_lon(g.width), sin_lon(g.width), cos_lat(g.height), sin_lat(g.height) {
        for (int x = 0; x * 2 < g.width; ++x) {
            const double lon = g.lon_at(x);
            cos_lon[x] = std::cos(lon);
            sin_lon[x] = std::sin(lon);
            cos_lon[g.width - 1 - x] = cos_lon[x];
            sin_lon[g.width - 1 - x] = -sin_lon[x];
        }
        if (g.width % 2) {  // middle column sits at lon = 0
            cos_lon[g.width / 2] = 1.0;
            sin_lon[g.width / 2] = 0.0;
        }
        for (int y = 0; y * 2 < g.height; ++y) {
            const double lat = g.lat_at(y);
            cos_lat[y] = std::cos(lat);
            sin_lat[y] = std::sin(lat);
            cos_lat[g.height - 1 - y] = cos_lat[y];
            sin_lat[g.height - 1 - y] = -sin_lat[y];
        }
        if (g.height % 2) {  // middle row sits on the equator
            cos_lat[g.height / 2] = 1.0;
            sin_lat[g.height / 2] = 0.0;
        }
    }
};

inline SphericalPoint pixel_to_sphere(const EquirectGrid& g, int x, int y) {
    if (x < 0 || x >= g.width || y < 0 || y >= g.height)
        throw input_error("pixel_to_sphere: pixel (" + std::to_string(x) + "," +
                          std::to_string(y) + ") outside grid");
    return {g.lon_at(x), g.lat_at(y)};
}

// Containing pixel of a spherical point (inverse of pixel_to_sphere up to
// the pixel). Longitude wraps, latitude clamps at the poles.
inline std::pair<int, int> sphere_to_pixel(const EquirectGrid& g, const SphericalPoint& p) {
    double u = (p.lon / (2.0 * M_PI) + 0.5) * g.width;
    if (u < 0) u += g.width;
    if (u >= g.width) u -= g.width;
    int x = std::clamp(int(std::floor(u)), 0, g.width - 1);
    double v = (0.5 - p.lat / M_PI) * g.height;
    int y = std::clamp(int(std::floor(v)), 0, g.height - 1);
    return {x, y};
}

// Great-circle distance in [0, pi]. atan2 form stays accurate near 0 and pi.
inline double angular_distance(const SphericalPoint& a, const SphericalPoint& b) {
    const auto ua = unit_vector(a);
    const auto ub = unit_vector(b);
    const double dot = ua[0] * ub[0] + ua[1] * ub[1] + ua[2] * ub[2];
    const double cx = ua[1] * ub[2] - ua[2] * ub[1];
    const double cy = ua[2] * ub[0] - ua[0] * ub[2];
    const double cz = ua[0] * ub[1] - ua[1] * ub[0];
    return std::atan2(std::sqrt(cx * cx + cy * cy + cz * cz), dot);
}

// weight(y) = cos(latitude of row y); maximal at the equator, symmetric,
// vanishing toward the poles.
inline LatitudeWeightGrid latitude_weights(const EquirectGrid& g) {
    GridTrig trig(g);
    return LatitudeWeightGrid{std::move(trig.cos_lat)};
}

// exp(-d^2 / (2 sigma^2)) with d the great-circle distance to `center`,
// sigma given in degrees. Unnormalized: peak value is 1 when the center
// coincides with a pixel center.
inline SaliencyMap angular_gaussian(double sigma_deg, const SphericalPoint& center,
                                    const EquirectGrid& grid) {
    if (!(sigma_deg > 0.0))
        throw input_error("angular_gaussian: sigma must be positive");
    const double sigma = sigma_deg * M_PI / 180.0;
    const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
    const GridTrig trig(grid);
    const auto c = unit_vector(center);
    SaliencyMap out(grid);
    for (int y = 0; y < grid.height; ++y) {
        const double clat = trig.cos_lat[y], slat = trig.sin_lat[y];
        const double zc = slat * c[2];
        double* row = out.v.data() + std::size_t(y) * grid.width;
        for (int x = 0; x < grid.width; ++x) {
            const double dot = clat * (trig.cos_lon[x] * c[0] + trig.sin_lon[x] * c[1]) + zc;
            const double d = std::acos(std::clamp(dot, -1.0, 1.0));
            row[x] = std::exp(-d * d * inv2s2);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Cubemap projection (gnomonic per face, bilinear sampling both ways).

enum class CubeFace { front = 0, back, left, right, up, down };

struct CubemapFaceSet {
    int face_size = 0;
    std::array<std::vector<double>, 6> faces;  // row-major face_size x face_size

    CubemapFaceSet() = default;
    explicit CubemapFaceSet(int size) : face_size(size) {
        if (size < 1) throw input_error("CubemapFaceSet: face_size must be positive");
        for (auto& f : faces) f.assign(std::size_t(size) * size, 0.0);
    }

    double& at(CubeFace f, int i, int j) {
        return faces[int(f)][std::size_t(j) * face_size + i];
    }
    double at(CubeFace f, int i, int j) const {
        return faces[int(f)][std::size_t(j) * face_size + i];
    }
};

namespace detail {

struct FaceBasis {
    std::array<double, 3> n, u, v;  // normal, in-face +x, in-face +y (image down)
};

inline const std::array<FaceBasis, 6>& face_bases() {
    static const std::array<FaceBasis, 6> bases = {{
        {{1, 0, 0}, {0, 1, 0}, {0, 0, -1}},    // front  (+X)
        {{-1, 0, 0}, {0, -1, 0}, {0, 0, -1}},  // back   (-X)
        {{0, -1, 0}, {1, 0, 0}, {0, 0, -1}},   // left   (-Y)
        {{0, 1, 0}, {-1, 0, 0}, {0, 0, -1}},   // right  (+Y)
        {{0, 0, 1}, {0, 1, 0}, {1, 0, 0}},     // up     (+Z)
        {{0, 0, -1}, {0, 1, 0}, {-1, 0, 0}},   // down   (-Z)
    }};
    return bases;
}

inline double lerp(double a, double b, double t) { return a + t * (b - a); }

// Bilinear sample with longitude wrap and latitude clamp. Exact on
// constant maps (nested lerp form).
inline double sample_equirect(const SaliencyMap& m, double lon, double lat) {
    const int W = m.grid.width, H = m.grid.height;
    double u = (lon / (2.0 * M_PI) + 0.5) * W - 0.5;
    double v = (0.5 - lat / M_PI) * H - 0.5;
    double fu = u - std::floor(u);
    int x0 = int(std::floor(u));
    x0 %= W;
    if (x0 < 0) x0 += W;
    const int x1 = (x0 + 1) % W;
    int y0 = int(std::floor(v));
    double fv = v - std::floor(v);
    if (y0 < 0) { y0 = 0; fv = 0.0; }
    if (y0 >= H - 1) { y0 = H - 1; fv = 0.0; }
    const int y1 = std::min(y0 + 1, H - 1);
    const double top = lerp(m.at(x0, y0), m.at(x1, y0), fu);
    const double bot = lerp(m.at(x0, y1), m.at(x1, y1), fu);
    return lerp(top, bot, fv);
}

inline double sample_face(const std::vector<double>& face, int F, double i, double j) {
    const auto clampf = [F](double t) { return std::clamp(t, 0.0, double(F - 1)); };
    i = clampf(i);
    j = clampf(j);
    const int i0 = std::min(int(std::floor(i)), F - 2 < 0 ? 0 : F - 2);
    const int j0 = std::min(int(std::floor(j)), F - 2 < 0 ? 0 : F - 2);
    const int i1 = std::min(i0 + 1, F - 1);
    const int j1 = std::min(j0 + 1, F - 1);
    const double fi = i - i0, fj = j - j0;
    const double top = lerp(face[std::size_t(j0) * F + i0], face[std::size_t(j0) * F + i1], fi);
    const double bot = lerp(face[std::size_t(j1) * F + i0], face[std::size_t(j1) * F + i1], fi);
    return lerp(top, bot, fj);
}

inline void require_finite(const std::vector<double>& v, const char* what) {
    for (double x : v)
        if (!std::isfinite(x)) throw data_error(std::string(what) + ": non-finite value");
}

}  // namespace detail

inline CubemapFaceSet equirect_to_cubemap(const SaliencyMap& map, int face_size) {
    if (face_size < 1) throw input_error("equirect_to_cubemap: face_size must be positive");
    detail::require_finite(map.v, "equirect_to_cubemap");
    CubemapFaceSet out(face_size);
    for (int f = 0; f < 6; ++f) {
        const auto& basis = detail::face_bases()[f];
        for (int j = 0; j < face_size; ++j) {
            const double b = 2.0 * (j + 0.5) / face_size - 1.0;
            for (int i = 0; i < face_size; ++i) {
                const double a = 2.0 * (i + 0.5) / face_size - 1.0;
                const double dx = basis.n[0] + a * basis.u[0] + b * basis.v[0];
                const double dy = basis.n[1] + a * basis.u[1] + b * basis.v[1];
                const double dz = basis.n[2] + a * basis.u[2] + b * basis.v[2];
                const double r = std::sqrt(dx * dx + dy * dy + dz * dz);
                const double lat = std::asin(std::clamp(dz / r, -1.0, 1.0));
                const double lon = std::atan2(dy, dx);
                out.faces[f][std::size_t(j) * face_size + i] =
                    detail::sample_equirect(map, lon, lat);
            }
        }
    }
    return out;
}

inline SaliencyMap cubemap_to_equirect(const CubemapFaceSet& faces, const EquirectGrid& grid) {
    for (const auto& f : faces.faces) detail::require_finite(f, "cubemap_to_equirect");
    const int F = faces.face_size;
    const GridTrig trig(grid);
    SaliencyMap out(grid);
    for (int y = 0; y < grid.height; ++y) {
        const double clat = trig.cos_lat[y], slat = trig.sin_lat[y];
        for (int x = 0; x < grid.width; ++x) {
            const double dx = clat * trig.cos_lon[x];
            const double dy = clat * trig.sin_lon[x];
            const double dz = slat;
            const double ax = std::fabs(dx), ay = std::fabs(dy), az = std::fabs(dz);
            CubeFace face;
            if (ax >= ay && ax >= az)
                face = dx >= 0 ? CubeFace::front : CubeFace::back;
            else if (ay >= az)
                face = dy >= 0 ? CubeFace::right : CubeFace::left;
            else
                face = dz >= 0 ? CubeFace::up : CubeFace::down;
            const auto& basis = detail::face_bases()[int(face)];
            const double dn = dx * basis.n[0] + dy * basis.n[1] + dz * basis.n[2];
            const double a = (dx * basis.u[0] + dy * basis.u[1] + dz * basis.u[2]) / dn;
            const double b = (dx * basis.v[0] + dy * basis.v[1] + dz * basis.v[2]) / dn;
            const double i = (a + 1.0) * 0.5 * F - 0.5;
            const double j = (b + 1.0) * 0.5 * F - 0.5;
            out.at(x, y) = detail::sample_face(faces.faces[int(face)], F, i, j);
        }
    }
    return out;
}

}  // namespace sal360
