#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "qpa/sweep.hpp"

namespace qpa {

// 8-bit RGB raster, row-major from the top-left corner.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;

  Image(int w, int h) : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3, 255) {}

  void set(int x, int y, std::array<std::uint8_t, 3> c) {
    const std::size_t o = (static_cast<std::size_t>(y) * width + x) * 3;
    rgb[o] = c[0];
    rgb[o + 1] = c[1];
    rgb[o + 2] = c[2];
  }

  std::array<std::uint8_t, 3> get(int x, int y) const {
    const std::size_t o = (static_cast<std::size_t>(y) * width + x) * 3;
    return {rgb[o], rgb[o + 1], rgb[o + 2]};
  }
};

inline void write_ppm(const Image& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "P6\n" << img.width << ' ' << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.rgb.data()),
            static_cast<std::streamsize>(img.rgb.size()));
  if (!out) throw std::runtime_error("failed writing " + path);
}

inline Image read_ppm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string magic;
  in >> magic;
  if (magic != "P6") throw std::runtime_error(path + " is not a binary PPM file");
  auto next_int = [&in, &path]() {
    int c = in.get();
    while (c == '#' || std::isspace(c)) {
      if (c == '#') {
        while (c != '\n' && c != EOF) c = in.get();
      }
      c = in.get();
    }
    int value = 0;
    bool any = false;
    while (std::isdigit(c)) {
      value = value * 10 + (c - '0');
      any = true;
      c = in.get();
    }
    if (!any) throw std::runtime_error(path + ": malformed PPM header");
    return value;
  };
  const int w = next_int();
  const int h = next_int();
  const int maxval = next_int();
  if (maxval != 255) throw std::runtime_error(path + ": unsupported PPM depth");
  Image img(w, h);
  in.read(reinterpret_cast<char*>(img.rgb.data()), static_cast<std::streamsize>(img.rgb.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.rgb.size())) {
    throw std::runtime_error(path + ": truncated PPM payload");
  }
  return img;
}

// Dark-to-bright sequential ramp for nonnegative fields, t in [0, 1].
inline std::array<std::uint8_t, 3> sequential_color(double t) {
  t = std::clamp(t, 0.0, 1.0);
  static constexpr std::array<std::array<double, 3>, 5> anchors{{{68, 1, 84},
                                                                 {59, 82, 139},
                                                                 {33, 145, 140},
                                                                 {94, 201, 98},
                                                                 {253, 231, 37}}};
  const double pos = t * (anchors.size() - 1);
  const std::size_t lo = std::min(static_cast<std::size_t>(pos), anchors.size() - 2);
  const double f = pos - static_cast<double>(lo);
  std::array<std::uint8_t, 3> out{};
  for (int c = 0; c < 3; ++c) {
    const double v = anchors[lo][c] + f * (anchors[lo + 1][c] - anchors[lo][c]);
    out[c] = static_cast<std::uint8_t>(std::lround(v));
  }
  return out;
}

// Blue-white-red diverging ramp for signed fields, t in [-1, 1], white at zero.
inline std::array<std::uint8_t, 3> diverging_color(double t) {
  t = std::clamp(t, -1.0, 1.0);
  const std::array<double, 3> neg{33, 102, 172};
  const std::array<double, 3> mid{247, 247, 247};
  const std::array<double, 3> pos{178, 24, 43};
  const std::array<double, 3>& a = t < 0.0 ? neg : pos;
  const double f = std::abs(t);
  std::array<std::uint8_t, 3> out{};
  for (int c = 0; c < 3; ++c) {
    const double v = mid[c] + f * (a[c] - mid[c]);
    out[c] = static_cast<std::uint8_t>(std::lround(v));
  }
  return out;
}

enum class MapKind { KeyRateNoisy, KeyRateQpa, Gain };

namespace detail {

struct FieldGrid {
  std::size_t np = 0;
  std::size_t nq = 0;
  std::vector<double> v;

  double at(std::size_t i, std::size_t j) const { return v[i * nq + j]; }

  // Bilinear interpolation at fractional grid coordinates, clamped to the
  // grid; this is what turns the discrete sweep into a smooth raster.
  double bilinear(double gi, double gj) const {
    gi = std::clamp(gi, 0.0, static_cast<double>(np - 1));
    gj = std::clamp(gj, 0.0, static_cast<double>(nq - 1));
    const std::size_t i0 = std::min(static_cast<std::size_t>(gi), np - 1);
    const std::size_t j0 = std::min(static_cast<std::size_t>(gj), nq - 1);
    const std::size_t i1 = std::min(i0 + 1, np - 1);
    const std::size_t j1 = std::min(j0 + 1, nq - 1);
    const double fi = gi - static_cast<double>(i0);
    const double fj = gj - static_cast<double>(j0);
    const double a = at(i0, j0) * (1.0 - fi) + at(i1, j0) * fi;
    const double b = at(i0, j1) * (1.0 - fi) + at(i1, j1) * fi;
    return a * (1.0 - fj) + b * fj;
  }
};

inline FieldGrid make_field(const SweepResult& result,
                            const std::function<double(const GridPoint&)>& f) {
  FieldGrid grid;
  grid.np = result.np;
  grid.nq = result.nq;
  grid.v.resize(result.grid.size());
  for (std::size_t g = 0; g < result.grid.size(); ++g) grid.v[g] = f(result.grid[g]);
  return grid;
}

// Unclamped key fraction; its zero crossing marks the threshold contour even
// where the reported (clamped) rate is flat at zero.
inline double unclamped_rate(const QberPair& e) {
  return 1.0 - binary_entropy(e.e_z) - binary_entropy(e.e_x);
}

// 5x7 bitmaps for the roman-numeral letters used as region labels.
inline const std::array<std::uint8_t, 7>& glyph_rows(char c) {
  static const std::array<std::uint8_t, 7> glyph_i{0b11111, 0b00100, 0b00100, 0b00100,
                                                   0b00100, 0b00100, 0b11111};
  static const std::array<std::uint8_t, 7> glyph_v{0b10001, 0b10001, 0b10001, 0b10001,
                                                   0b01010, 0b01010, 0b00100};
  if (c == 'I') return glyph_i;
  if (c == 'V') return glyph_v;
  throw std::invalid_argument("glyph_rows: unsupported character");
}

inline void draw_text(Image& img, int cx, int cy, const std::string& text, int scale,
                      std::array<std::uint8_t, 3> color) {
  const int glyph_w = 5 * scale;
  const int gap = scale;
  const int total_w =
      static_cast<int>(text.size()) * glyph_w + (static_cast<int>(text.size()) - 1) * gap;
  const int total_h = 7 * scale;
  int x0 = cx - total_w / 2;
  const int y0 = cy - total_h / 2;
  for (char c : text) {
    const auto& rows = glyph_rows(c);
    for (int r = 0; r < 7; ++r) {
      for (int col = 0; col < 5; ++col) {
        if (!((rows[r] >> (4 - col)) & 1)) continue;
        for (int dy = 0; dy < scale; ++dy) {
          for (int dx = 0; dx < scale; ++dx) {
            const int x = x0 + col * scale + dx;
            const int y = y0 + r * scale + dy;
            if (x >= 0 && x < img.width && y >= 0 && y < img.height) img.set(x, y, color);
          }
        }
      }
    }
    x0 += glyph_w + gap;
  }
}

}  // namespace detail

// Raster heatmap of one sweep field. The two key-rate maps share one colour
// scale so they can be compared side by side; the gain map uses a diverging
// scale centred at zero. Threshold contours are drawn where the relevant
// unclamped rate changes sign, and the gain map carries region labels at the
// region centroids.
inline Image render_map(const SweepResult& result, MapKind kind) {
  if (result.np == 0 || result.nq == 0 || result.grid.empty()) {
    throw std::invalid_argument("render_map: empty sweep result");
  }
  const auto k_noisy = detail::make_field(result, [](const GridPoint& gp) {
    return gp.report.k_noisy;
  });
  const auto k_qpa = detail::make_field(result, [](const GridPoint& gp) {
    return gp.report.k_qpa;
  });
  const auto gain_field = detail::make_field(result, [](const GridPoint& gp) {
    return gp.report.gain;
  });

  double rate_max = 0.0;
  for (double v : k_noisy.v) rate_max = std::max(rate_max, v);
  for (double v : k_qpa.v) rate_max = std::max(rate_max, v);
  double gain_max = 0.0;
  for (double v : gain_field.v) gain_max = std::max(gain_max, std::abs(v));

  const detail::FieldGrid* value_field = nullptr;
  std::vector<detail::FieldGrid> contours;
  switch (kind) {
    case MapKind::KeyRateNoisy:
      value_field = &k_noisy;
      contours.push_back(detail::make_field(result, [](const GridPoint& gp) {
        return detail::unclamped_rate(gp.report.pol);
      }));
      contours.push_back(detail::make_field(result, [](const GridPoint& gp) {
        return detail::unclamped_rate(gp.report.et);
      }));
      break;
    case MapKind::KeyRateQpa:
      value_field = &k_qpa;
      contours.push_back(detail::make_field(result, [](const GridPoint& gp) {
        return gp.report.qpa_defined ? detail::unclamped_rate(gp.report.post_pol) : -1.0;
      }));
      break;
    case MapKind::Gain:
      value_field = &gain_field;
      contours.push_back(gain_field);
      break;
  }

  const std::size_t np = result.np;
  const std::size_t nq = result.nq;
  const int longest = static_cast<int>(std::max(np, nq)) - 1;
  const int ppc = std::clamp(longest > 0 ? (480 + longest - 1) / longest : 480, 1, 480);
  const int width = np > 1 ? static_cast<int>(np - 1) * ppc + 1 : ppc;
  const int height = nq > 1 ? static_cast<int>(nq - 1) * ppc + 1 : ppc;

  Image img(width, height);
  std::vector<std::vector<double>> contour_pixels(contours.size());
  for (auto& cp : contour_pixels) {
    cp.resize(static_cast<std::size_t>(width) * height);
  }

  for (int y = 0; y < height; ++y) {
    // Row 0 sits at the top of the image and carries the largest q.
    const double gj = nq > 1 ? static_cast<double>(height - 1 - y) / ppc : 0.0;
    for (int x = 0; x < width; ++x) {
      const double gi = np > 1 ? static_cast<double>(x) / ppc : 0.0;
      const double v = value_field->bilinear(gi, gj);
      if (kind == MapKind::Gain) {
        img.set(x, y, diverging_color(gain_max > 0.0 ? v / gain_max : 0.0));
      } else {
        img.set(x, y, sequential_color(rate_max > 0.0 ? v / rate_max : 0.0));
      }
      for (std::size_t c = 0; c < contours.size(); ++c) {
        contour_pixels[c][static_cast<std::size_t>(y) * width + x] = contours[c].bilinear(gi, gj);
      }
    }
  }

  // A pixel lies on a contour when the interpolated field changes sign between
  // it and a direct neighbour.
  const std::array<std::uint8_t, 3> black{0, 0, 0};
  for (std::size_t c = 0; c < contour_pixels.size(); ++c) {
    const std::vector<double>& f = contour_pixels[c];
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const double v = f[static_cast<std::size_t>(y) * width + x];
        auto opposite = [&](int nx, int ny) {
          const double w = f[static_cast<std::size_t>(ny) * width + nx];
          return (v > 0.0 && w <= 0.0) || (v <= 0.0 && w > 0.0);
        };
        bool on_contour = false;
        if (x + 1 < width && opposite(x + 1, y)) on_contour = true;
        if (!on_contour && y + 1 < height && opposite(x, y + 1)) on_contour = true;
        if (on_contour) img.set(x, y, black);
      }
    }
  }

  if (kind == MapKind::Gain) {
    struct LabelAccum {
      double sum_i = 0.0;
      double sum_j = 0.0;
      std::size_t n = 0;
    };
    std::array<LabelAccum, 4> acc;
    for (std::size_t g = 0; g < result.grid.size(); ++g) {
      const Region region = result.grid[g].report.region;
      if (region == Region::None) continue;
      const std::size_t idx = static_cast<std::size_t>(region) - 1;
      acc[idx].sum_i += static_cast<double>(g / nq);
      acc[idx].sum_j += static_cast<double>(g % nq);
      ++acc[idx].n;
    }
    for (std::size_t idx = 0; idx < acc.size(); ++idx) {
      if (acc[idx].n == 0) continue;
      const Region region = static_cast<Region>(idx + 1);
      const double ci = acc[idx].sum_i / static_cast<double>(acc[idx].n);
      const double cj = acc[idx].sum_j / static_cast<double>(acc[idx].n);
      const int cx = static_cast<int>(std::lround(ci * ppc));
      const int cy = height - 1 - static_cast<int>(std::lround(cj * ppc));
      detail::draw_text(img, cx, cy, std::string(region_name(region)), 2, black);
    }
  }
  return img;
}

// Write all three maps; returns the paths written.
inline std::vector<std::string> render_maps(const SweepResult& result, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::vector<std::pair<MapKind, std::string>> kinds{
      {MapKind::KeyRateNoisy, "k_noisy.ppm"},
      {MapKind::KeyRateQpa, "k_qpa.ppm"},
      {MapKind::Gain, "gain.ppm"}};
  std::vector<std::string> paths;
  for (const auto& [kind, name] : kinds) {
    const std::string path = (std::filesystem::path(dir) / name).string();
    write_ppm(render_map(result, kind), path);
    paths.push_back(path);
  }
  return paths;
}

}  // namespace qpa
