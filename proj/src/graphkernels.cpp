#include <algorithm>
#include <cmath>

#include "lcew/graphkernels.hpp"

namespace lcew {

std::string kernel_name(KernelKind kind) {
  switch (kind) {
    case KernelKind::MI: return "mi";
    case KernelKind::L2: return "l2";
    case KernelKind::LONGITUDINAL: return "long";
  }
  return "?";
}

KernelKind kernel_from_name(const std::string& name) {
  if (name == "mi") return KernelKind::MI;
  if (name == "l2") return KernelKind::L2;
  if (name == "long") return KernelKind::LONGITUDINAL;
  throw std::invalid_argument("unknown kernel '" + name + "' (expected mi|l2|long)");
}

namespace {

std::vector<int> bin_indices(std::span<const double> s, int bins) {
  double lo = s[0], hi = s[0];
  for (double x : s) {
    if (!std::isfinite(x)) throw std::invalid_argument("histogram_mi: non-finite sample");
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  std::vector<int> idx(s.size(), 0);
  if (hi == lo) return idx;  // constant series: single occupied bin, H = 0
  const double width = (hi - lo) / bins;
  for (size_t k = 0; k < s.size(); ++k) {
    const int i = static_cast<int>(std::floor((s[k] - lo) / width));
    idx[k] = std::clamp(i, 0, bins - 1);
  }
  return idx;
}

double xlogx(double c) { return c > 0.0 ? c * std::log(c) : 0.0; }

// H of a count vector: ln n - sum(c ln c) / n.
double entropy_of_counts(const std::vector<double>& counts, double n) {
  double s = 0.0;
  for (double c : counts) s += xlogx(c);
  return std::log(n) - s / n;
}

}  // namespace

MIEstimate histogram_mi(std::span<const double> a, std::span<const double> b, int bins) {
  if (a.size() != b.size()) throw std::invalid_argument("histogram_mi: length mismatch");
  const int n = static_cast<int>(a.size());
  if (n < 5) throw InsufficientSamples("histogram_mi: need at least 5 samples, got " + std::to_string(n));
  if (bins < 2) throw std::invalid_argument("histogram_mi: bins must be >= 2");

  const auto ia = bin_indices(a, bins);
  const auto ib = bin_indices(b, bins);

  std::vector<double> joint(static_cast<size_t>(bins) * bins, 0.0);
  for (int k = 0; k < n; ++k) joint[static_cast<size_t>(ia[k]) * bins + ib[k]] += 1.0;

  std::vector<double> row(bins, 0.0), col(bins, 0.0);
  for (int i = 0; i < bins; ++i) {
    for (int j = 0; j < bins; ++j) {
      row[i] += joint[static_cast<size_t>(i) * bins + j];
      col[j] += joint[static_cast<size_t>(i) * bins + j];
    }
  }

  // Joint-entropy accumulation pairs (i,j) with (j,i) so that swapping the
  // arguments (a transpose of the joint histogram) yields the identical sum.
  double s_joint = 0.0;
  for (int i = 0; i < bins; ++i) {
    s_joint += xlogx(joint[static_cast<size_t>(i) * bins + i]);
    for (int j = i + 1; j < bins; ++j) {
      s_joint += xlogx(joint[static_cast<size_t>(i) * bins + j]) +
                 xlogx(joint[static_cast<size_t>(j) * bins + i]);
    }
  }

  MIEstimate est;
  est.sample_count = n;
  est.bin_count = bins;
  est.h_a = entropy_of_counts(row, n);
  est.h_b = entropy_of_counts(col, n);
  est.h_joint = std::log(static_cast<double>(n)) - s_joint / n;
  est.value = std::max(0.0, est.h_a + est.h_b - est.h_joint);
  return est;
}

AdjacencyMatrix adjacency(const Scene& scene, int t, KernelKind kind,
                          const KernelParams& params) {
  const int n = scene.num_vehicles();
  if (t < 0 || t >= scene.history_steps()) {
    throw std::invalid_argument("adjacency: timestep outside history");
  }
  AdjacencyMatrix out;
  out.kind = kind;
  out.t = t;
  out.w = Mat(n, n);

  if (kind == KernelKind::MI) {
    const int prefix = t + 1;
    if (prefix < std::max(5, params.mi_min_samples)) return out;  // no evidence yet
    std::vector<std::vector<double>> xs(n), ys(n);
    for (int i = 0; i < n; ++i) {
      xs[i].resize(prefix);
      ys[i].resize(prefix);
      for (int s = 0; s < prefix; ++s) {
        xs[i][s] = scene.history.at(s, 0, i);
        ys[i][s] = scene.history.at(s, 1, i);
      }
    }
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const double v = std::max(
            {histogram_mi(xs[i], xs[j], params.mi_bins).value,
             histogram_mi(xs[i], ys[j], params.mi_bins).value,
             histogram_mi(ys[i], xs[j], params.mi_bins).value,
             histogram_mi(ys[i], ys[j], params.mi_bins).value});
        out.w.at(i, j) = v;
        out.w.at(j, i) = v;
      }
    }
    return out;
  }

  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      double v = 0.0;
      if (kind == KernelKind::L2) {
        const Vec2 d = scene.history_pos(t, i) - scene.history_pos(t, j);
        const double dist = d.norm();
        v = dist != 0.0 ? 1.0 / dist : 0.0;
      } else {
        const double dx = std::abs(scene.history.at(t, 0, i) - scene.history.at(t, 0, j));
        v = dx != 0.0 ? 1.0 / dx : 0.0;
      }
      out.w.at(i, j) = v;
      out.w.at(j, i) = v;
    }
  }
  return out;
}

NormalizedAdjacency normalize_adjacency(const AdjacencyMatrix& a) {
  const int n = a.w.rows();
  if (a.w.cols() != n) throw std::invalid_argument("normalize_adjacency: matrix not square");
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (a.w.at(i, j) != a.w.at(j, i)) {
        throw std::invalid_argument("normalize_adjacency: input not symmetric");
      }
    }
    for (int j = 0; j < n; ++j) {
      if (!(a.w.at(i, j) >= 0.0)) {
        throw std::invalid_argument("normalize_adjacency: negative or NaN weight");
      }
    }
  }

  NormalizedAdjacency out;
  out.t = a.t;
  out.w = Mat(n, n);
  std::vector<double> degree(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double sum = 1.0;  // unit self-loop
    for (int j = 0; j < n; ++j)
      if (j != i) sum += a.w.at(i, j);
    degree[i] = sum;
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double a_hat = (i == j ? 1.0 : a.w.at(i, j));
      out.w.at(i, j) = a_hat / std::sqrt(degree[i] * degree[j]);
    }
  }
  return out;
}

std::vector<NormalizedAdjacency> adjacency_stack(const Scene& scene, KernelKind kind,
                                                 const KernelParams& params) {
  std::vector<NormalizedAdjacency> stack;
  stack.reserve(scene.history_steps());
  for (int t = 0; t < scene.history_steps(); ++t) {
    stack.push_back(normalize_adjacency(adjacency(scene, t, kind, params)));
  }
  return stack;
}

}  // namespace lcew
