#include "oracles.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <limits>

namespace pspace::testing {

Eigen::MatrixXd conditional_phi(const SpecializationMatrix& s) {
  const auto n = s.bits.cols();
  Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      int both = 0, has_i = 0, has_j = 0;
      for (Eigen::Index c = 0; c < s.bits.rows(); ++c) {
        has_i += s.bits(c, i);
        has_j += s.bits(c, j);
        both += s.bits(c, i) && s.bits(c, j);
      }
      if (has_i == 0 || has_j == 0) continue;
      const double p_i_given_j = static_cast<double>(both) / has_j;
      const double p_j_given_i = static_cast<double>(both) / has_i;
      phi(i, j) = std::min(p_i_given_j, p_j_given_i);
    }
  }
  return phi;
}

double rca_direct(const Eigen::MatrixXd& x, Eigen::Index c, Eigen::Index p) {
  double country = 0, product = 0, world = 0;
  for (Eigen::Index k = 0; k < x.cols(); ++k) country += x(c, k);
  for (Eigen::Index k = 0; k < x.rows(); ++k) product += x(k, p);
  for (Eigen::Index a = 0; a < x.rows(); ++a)
    for (Eigen::Index b = 0; b < x.cols(); ++b) world += x(a, b);
  if (country == 0 || product == 0) return 0.0;
  return (x(c, p) / country) / (product / world);
}

namespace {

std::vector<std::pair<int, int>> decode_pruefer(const std::vector<int>& code, int n) {
  std::vector<int> degree(static_cast<std::size_t>(n), 1);
  for (int v : code) ++degree[static_cast<std::size_t>(v)];
  std::vector<std::pair<int, int>> edges;
  for (int v : code) {
    for (int leaf = 0; leaf < n; ++leaf) {
      if (degree[static_cast<std::size_t>(leaf)] == 1) {
        edges.emplace_back(leaf, v);
        --degree[static_cast<std::size_t>(leaf)];
        --degree[static_cast<std::size_t>(v)];
        break;
      }
    }
  }
  int u = -1;
  for (int k = 0; k < n; ++k) {
    if (degree[static_cast<std::size_t>(k)] == 1) {
      if (u < 0) {
        u = k;
      } else {
        edges.emplace_back(u, k);
        break;
      }
    }
  }
  return edges;
}

}  // namespace

std::vector<double> best_tree_weights(const Eigen::MatrixXd& phi) {
  const int n = static_cast<int>(phi.rows());
  if (n < 2) return {};
  if (n == 2) return {phi(0, 1)};

  std::vector<double> best;
  std::vector<int> code(static_cast<std::size_t>(n - 2), 0);
  while (true) {
    std::vector<double> w;
    for (auto [a, b] : decode_pruefer(code, n)) w.push_back(phi(a, b));
    std::sort(w.begin(), w.end(), std::greater<>());
    if (best.empty() || std::lexicographical_compare(best.begin(), best.end(), w.begin(), w.end())) {
      best = w;
    }
    std::size_t pos = 0;
    while (pos < code.size() && ++code[pos] == n) code[pos++] = 0;
    if (pos == code.size()) break;
  }
  return best;
}

std::vector<int> bfs_steps(const Eigen::MatrixXd& phi, const std::vector<std::size_t>& seeds,
                           double phi0, bool inclusive, int max_rounds) {
  const auto n = static_cast<std::size_t>(phi.rows());
  std::vector<int> dist(n, -1);
  std::deque<std::size_t> queue;
  for (auto s : seeds) {
    dist[s] = 0;
    queue.push_back(s);
  }
  while (!queue.empty()) {
    auto u = queue.front();
    queue.pop_front();
    for (std::size_t v = 0; v < n; ++v) {
      if (v == u || dist[v] >= 0) continue;
      const double w = phi(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v));
      if (inclusive ? w >= phi0 : w > phi0) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }
  for (auto& d : dist) {
    if (d > max_rounds) d = -1;
  }
  return dist;
}

std::vector<std::size_t> average_linkage_order(const Eigen::MatrixXd& phi) {
  struct Cluster {
    std::size_t key;
    std::vector<std::size_t> leaves;
  };
  std::vector<Cluster> clusters;
  for (std::size_t k = 0; k < static_cast<std::size_t>(phi.rows()); ++k) clusters.push_back({k, {k}});

  auto linkage = [&](const Cluster& a, const Cluster& b) {
    double sum = 0;
    for (auto i : a.leaves)
      for (auto j : b.leaves)
        sum += 1.0 - phi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    return sum / static_cast<double>(a.leaves.size() * b.leaves.size());
  };

  while (clusters.size() > 1) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t ba = 0, bb = 0;
    for (std::size_t a = 0; a < clusters.size(); ++a) {
      for (std::size_t b = a + 1; b < clusters.size(); ++b) {
        const double d = linkage(clusters[a], clusters[b]);
        if (d < best - 1e-12) {
          best = d;
          ba = a;
          bb = b;
        }
      }
    }
    auto& keep = clusters[ba];
    keep.leaves.insert(keep.leaves.end(), clusters[bb].leaves.begin(), clusters[bb].leaves.end());
    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bb));
  }
  return clusters.empty() ? std::vector<std::size_t>{} : clusters.front().leaves;
}

double top_n_mean(std::vector<double> values, std::size_t n) {
  std::sort(values.begin(), values.end(), std::greater<>());
  if (values.size() > n) values.resize(n);
  double sum = 0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

}  // namespace pspace::testing
