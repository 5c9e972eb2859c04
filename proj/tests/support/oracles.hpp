#pragma once

// Brute-force reference implementations. Deliberately naive and kept free of
// any cxrseg algorithm code so that they can arbitrate the fast versions.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <vector>

namespace oracle {

// Row-major boolean raster.
struct Mask {
  int w = 0;
  int h = 0;
  std::vector<std::uint8_t> bits;
  bool at(int x, int y) const { return bits[static_cast<std::size_t>(y * w + x)] != 0; }
};

inline std::vector<std::pair<int, int>> disk(int r) {
  std::vector<std::pair<int, int>> out;
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx)
      if (dx * dx + dy * dy <= r * r) out.emplace_back(dx, dy);
  return out;
}

inline Mask erode(const Mask& m, int r) {
  Mask out{m.w, m.h, std::vector<std::uint8_t>(m.bits.size(), 0)};
  const auto se = disk(r);
  for (int y = 0; y < m.h; ++y)
    for (int x = 0; x < m.w; ++x) {
      bool all = true;
      for (auto [dx, dy] : se) {
        const int sx = x + dx, sy = y + dy;
        if (sx < 0 || sy < 0 || sx >= m.w || sy >= m.h || !m.at(sx, sy)) {
          all = false;
          break;
        }
      }
      out.bits[static_cast<std::size_t>(y * m.w + x)] = all ? 1 : 0;
    }
  return out;
}

inline Mask dilate(const Mask& m, int r) {
  Mask out{m.w, m.h, std::vector<std::uint8_t>(m.bits.size(), 0)};
  const auto se = disk(r);
  for (int y = 0; y < m.h; ++y)
    for (int x = 0; x < m.w; ++x) {
      bool any = false;
      for (auto [dx, dy] : se) {
        const int sx = x + dx, sy = y + dy;
        if (sx >= 0 && sy >= 0 && sx < m.w && sy < m.h && m.at(sx, sy)) {
          any = true;
          break;
        }
      }
      out.bits[static_cast<std::size_t>(y * m.w + x)] = any ? 1 : 0;
    }
  return out;
}

// Pair counting: every positive against every negative.
inline double auroc_pairs(const std::vector<double>& s, const std::vector<bool>& y) {
  double num = 0;
  double pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!y[i]) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j]) continue;
      pairs += 1;
      if (s[i] > s[j]) num += 1;
      else if (s[i] == s[j]) num += 0.5;
    }
  }
  return num / pairs;
}

struct F1Sweep {
  double threshold = 0;
  double f1 = -1;
};

// Tries every observed score in ascending order and keeps the last maximum,
// so ties land on the largest threshold. F1 is held as the exact rational
// 2tp / (2tp + fp + fn) and compared by cross-multiplication.
inline F1Sweep best_f1(const std::vector<double>& s, const std::vector<bool>& y) {
  std::vector<double> cands = s;
  std::sort(cands.begin(), cands.end());
  cands.erase(std::unique(cands.begin(), cands.end()), cands.end());
  F1Sweep best;
  long long bnum = -1, bden = 1;
  for (double t : cands) {
    long long tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const bool p = s[i] >= t;
      if (p && y[i]) ++tp;
      else if (p && !y[i]) ++fp;
      else if (!p && y[i]) ++fn;
    }
    const long long num = 2 * tp;
    const long long den = 2 * tp + fp + fn;
    const long long d = den == 0 ? 1 : den;
    if (num * bden >= bnum * d) {
      bnum = num;
      bden = d;
      best.threshold = t;
    }
  }
  best.f1 = static_cast<double>(bnum) / static_cast<double>(bden);
  return best;
}

// Student-t density integrated with composite Simpson on [|t|, upper] after
// the substitution u = 1/x to fold the infinite tail into a finite interval.
inline double t_density(double x, double nu) {
  const double c = std::exp(std::lgamma((nu + 1) / 2) - std::lgamma(nu / 2)) / std::sqrt(nu * M_PI);
  return c * std::pow(1 + x * x / nu, -(nu + 1) / 2);
}

inline double t_two_sided_tail(double t, double nu, int intervals = 200000) {
  t = std::fabs(t);
  // Central part by Simpson on [0, t]; the tail is 1 - 2 * central.
  const int n = intervals % 2 == 0 ? intervals : intervals + 1;
  const double hstep = t / n;
  double acc = t_density(0, nu) + t_density(t, nu);
  for (int i = 1; i < n; ++i) acc += (i % 2 ? 4 : 2) * t_density(i * hstep, nu);
  const double central = acc * hstep / 3;
  return 1 - 2 * central;
}

// Spearman with average ranks, computed from scratch.
inline std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0, equal = 0;
    for (double w : v) {
      if (w < v[i]) less += 1;
      else if (w == v[i]) equal += 1;
    }
    r[i] = less + (equal + 1) / 2;
  }
  return r;
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

// k x k row-major.
inline std::vector<double> upper(const std::vector<double>& m, std::size_t k) {
  std::vector<double> out;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) out.push_back(m[i * k + j]);
  return out;
}

inline double spearman_upper(const std::vector<double>& a, const std::vector<double>& b, std::size_t k) {
  return pearson(ranks(upper(a, k)), ranks(upper(b, k)));
}

struct MantelEnumeration {
  double rho = 0;
  std::size_t ge = 0;
  std::size_t total = 0;
};

// Every relabelling of b via Heap's algorithm (a different enumeration order
// from next_permutation on purpose).
inline MantelEnumeration mantel_enumerate(const std::vector<double>& a, const std::vector<double>& b, std::size_t k) {
  MantelEnumeration out;
  out.rho = spearman_upper(a, b, k);
  std::vector<std::size_t> p(k);
  std::iota(p.begin(), p.end(), 0);
  auto visit = [&] {
    std::vector<double> pb(k * k);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) pb[i * k + j] = b[p[i] * k + p[j]];
    const double r = spearman_upper(a, pb, k);
    ++out.total;
    if (r >= out.rho - 1e-12) ++out.ge;
  };
  std::vector<std::size_t> c(k, 0);
  visit();
  std::size_t i = 0;
  while (i < k) {
    if (c[i] < i) {
      if (i % 2 == 0) std::swap(p[0], p[i]);
      else std::swap(p[c[i]], p[i]);
      visit();
      ++c[i];
      i = 0;
    } else {
      c[i] = 0;
      ++i;
    }
  }
  return out;
}

}  // namespace oracle
