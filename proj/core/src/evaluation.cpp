#include "sgvae/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "sgvae/constructor.hpp"
#include "sgvae/dataset.hpp"
#include "sgvae/destructor.hpp"
#include "sgvae/parallel.hpp"
#include "sgvae/trainer.hpp"
#include "sgvae/util.hpp"

namespace sgvae {

namespace {

ad::Tensor draw_latent(Rng& rng, int d) {
  ad::Tensor z(ad::Shape{d});
  for (auto& v : z.data) v = rng.normal();
  return z;
}

Graph decode_once(const ParamStore& ps, const ModelDims& dims,
                  const ad::Tensor& z, Rng& rng, int max_nodes) {
  ad::Tape tape;
  DecoderParamsRef dec = bind_decoder(tape, ps, dims);
  return generate(tape, tape.constant(z), dec, rng, max_nodes).graph;
}

}  // namespace

double generation_accuracy(const ParamStore& ps, const ModelDims& dims,
                           const Rng& rng, int n, int max_nodes, int threads) {
  if (n < 1) throw std::invalid_argument("generation_accuracy: n < 1");
  std::vector<int> valid = parallel_map(n, threads, [&](int i) {
    Rng draw = rng.fork("draw", static_cast<std::uint64_t>(i));
    const ad::Tensor z = draw_latent(draw, dims.node_dim);
    return decode_once(ps, dims, z, draw, max_nodes).is_valid_cycle() ? 1 : 0;
  });
  return std::accumulate(valid.begin(), valid.end(), 0) /
         static_cast<double>(n);
}

std::vector<LatentRow> embed_corpus(const ParamStore& ps,
                                    const ModelDims& dims, const Rng& rng,
                                    int per_length, int min_len, int max_len,
                                    int threads) {
  if (per_length < 1 || min_len < 3 || max_len < min_len)
    throw std::invalid_argument("embed_corpus: bad corpus shape");
  const int lengths = max_len - min_len + 1;
  std::vector<LatentRow> rows =
      parallel_map(lengths * per_length, threads, [&](int i) {
        const int len = min_len + i / per_length;
        const int rep = i % per_length;
        Rng episode = rng.fork("embed", static_cast<std::uint64_t>(len),
                               static_cast<std::uint64_t>(rep));
        const Graph x = make_cycle(len, dims.node_dim, dims.edge_dim);
        ad::Tape tape;
        EncoderParamsRef enc = bind_encoder(tape, ps, dims);
        EncodeResult e = encode_sample(tape, x, enc, episode);
        LatentRow row;
        row.graph_id = i;
        row.cycle_len = len;
        row.z = e.z_value.data;
        row.order = e.order;
        return row;
      });
  return rows;
}

void write_latent_csv(std::ostream& out, const std::vector<LatentRow>& rows) {
  const std::size_t d = rows.empty() ? 5 : rows[0].z.size();
  out << "graph_id,cycle_len";
  for (std::size_t i = 0; i < d; ++i) out << ",z" << i;
  out << ",order\n";
  for (const LatentRow& r : rows) {
    out << r.graph_id << ',' << r.cycle_len;
    for (double v : r.z) out << ',' << format_double(v);
    out << ',' << join_ints(r.order, '-') << '\n';
  }
}

void write_latent_csv(const std::string& path,
                      const std::vector<LatentRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_latent_csv(out, rows);
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

PcaResult pca(const std::vector<std::vector<double>>& points) {
  const std::size_t n = points.size();
  if (n < 2) throw std::invalid_argument("pca: need at least 2 points");
  const std::size_t d = points[0].size();
  for (const auto& p : points)
    if (p.size() != d) throw std::invalid_argument("pca: ragged points");

  PcaResult out;
  out.mean.assign(d, 0.0);
  for (const auto& p : points)
    for (std::size_t j = 0; j < d; ++j) out.mean[j] += p[j];
  for (auto& m : out.mean) m /= static_cast<double>(n);

  // Covariance, normalized by n - 1.
  std::vector<std::vector<double>> cov(d, std::vector<double>(d, 0.0));
  for (const auto& p : points)
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b)
        cov[a][b] += (p[a] - out.mean[a]) * (p[b] - out.mean[b]);
  for (auto& row : cov)
    for (auto& v : row) v /= static_cast<double>(n - 1);

  // Cyclic Jacobi eigendecomposition: A = V diag(w) V^T.
  std::vector<std::vector<double>> a = cov;
  std::vector<std::vector<double>> vmat(d, std::vector<double>(d, 0.0));
  for (std::size_t i = 0; i < d; ++i) vmat[i][i] = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < d; ++p)
      for (std::size_t q = p + 1; q < d; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-28) break;
    for (std::size_t p = 0; p < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) {
        if (a[p][q] == 0.0) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < d; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < d; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < d; ++k) {
          const double vkp = vmat[k][p], vkq = vmat[k][q];
          vmat[k][p] = c * vkp - s * vkq;
          vmat[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> idx(d);
  std::iota(idx.begin(), idx.end(), 0u);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) {
    return a[x][x] > a[y][y];
  });

  out.variances.reserve(d);
  out.components.assign(d, std::vector<double>(d, 0.0));
  for (std::size_t r = 0; r < d; ++r) {
    const std::size_t col = idx[r];
    out.variances.push_back(std::max(0.0, a[col][col]));
    for (std::size_t k = 0; k < d; ++k) out.components[r][k] = vmat[k][col];
    // Fix the sign: largest-magnitude entry positive.
    std::size_t arg = 0;
    for (std::size_t k = 1; k < d; ++k)
      if (std::abs(out.components[r][k]) > std::abs(out.components[r][arg]))
        arg = k;
    if (out.components[r][arg] < 0.0)
      for (auto& v : out.components[r]) v = -v;
  }

  out.projections.assign(n, std::vector<double>(d, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t r = 0; r < d; ++r) {
      double dot = 0.0;
      for (std::size_t k = 0; k < d; ++k)
        dot += (points[i][k] - out.mean[k]) * out.components[r][k];
      out.projections[i][r] = dot;
    }
  return out;
}

namespace {

double dist(const std::vector<double>& a, const std::vector<double>& b) {
  double sq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    sq += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(sq);
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(static_cast<std::size_t>(n)) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  }
  void unite(int x, int y) {
    x = find(x), y = find(y);
    if (x != y) parent[static_cast<std::size_t>(std::max(x, y))] = std::min(x, y);
  }
};

}  // namespace

std::vector<int> largest_cluster(const std::vector<std::vector<double>>& points,
                                 double eps_factor) {
  const int n = static_cast<int>(points.size());
  if (n == 0) throw std::invalid_argument("largest_cluster: no points");
  if (n == 1) return {0};

  std::vector<double> nn(static_cast<std::size_t>(n),
                         std::numeric_limits<double>::infinity());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double dij = dist(points[static_cast<std::size_t>(i)],
                              points[static_cast<std::size_t>(j)]);
      nn[static_cast<std::size_t>(i)] = std::min(nn[static_cast<std::size_t>(i)], dij);
      nn[static_cast<std::size_t>(j)] = std::min(nn[static_cast<std::size_t>(j)], dij);
    }
  std::vector<double> sorted = nn;
  std::sort(sorted.begin(), sorted.end());
  const double eps = eps_factor * sorted[sorted.size() / 2];

  UnionFind uf(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (dist(points[static_cast<std::size_t>(i)],
               points[static_cast<std::size_t>(j)]) <= eps)
        uf.unite(i, j);

  std::map<int, std::vector<int>> groups;
  for (int i = 0; i < n; ++i) groups[uf.find(i)].push_back(i);
  const std::vector<int>* best = nullptr;
  for (const auto& [root, members] : groups) {
    (void)root;
    if (best == nullptr || members.size() > best->size()) best = &members;
  }
  return *best;
}

InterpolationReport interpolation_report(const ParamStore& ps,
                                         const ModelDims& dims, const Rng& rng,
                                         const std::vector<LatentRow>& corpus,
                                         int n_points, int samples,
                                         int max_nodes, double eps_factor,
                                         int threads) {
  if (corpus.empty())
    throw std::invalid_argument("interpolation_report: empty corpus");
  if (n_points < 2 || samples < 1)
    throw std::invalid_argument("interpolation_report: bad shape");

  std::vector<std::vector<double>> zs;
  zs.reserve(corpus.size());
  for (const LatentRow& r : corpus) zs.push_back(r.z);
  const std::vector<int> cluster = largest_cluster(zs, eps_factor);
  if (cluster.size() < 2)
    throw std::invalid_argument(
        "interpolation_report: largest cluster has fewer than 2 points");

  std::vector<std::vector<double>> clustered;
  clustered.reserve(cluster.size());
  for (int i : cluster) clustered.push_back(zs[static_cast<std::size_t>(i)]);
  const PcaResult p = pca(clustered);

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& proj : p.projections) {
    lo = std::min(lo, proj[0]);
    hi = std::max(hi, proj[0]);
  }

  InterpolationReport report;
  report.origin = p.mean;
  report.axis = p.components[0];
  const std::size_t d = p.mean.size();

  for (int i = 0; i < n_points; ++i) {
    const double coord = lo + (hi - lo) * i / (n_points - 1);
    ad::Tensor z(ad::Shape{static_cast<int>(d)});
    for (std::size_t k = 0; k < d; ++k)
      z.data[k] = p.mean[k] + coord * p.components[0][k];

    std::vector<int> lengths = parallel_map(samples, threads, [&](int j) {
      Rng draw = rng.fork("interp", static_cast<std::uint64_t>(i),
                          static_cast<std::uint64_t>(j));
      const Graph g = decode_once(ps, dims, z, draw, max_nodes);
      return g.is_valid_cycle() ? static_cast<int>(g.node_count()) : -1;
    });

    InterpPoint pt;
    pt.coord = coord;
    pt.n_total = samples;
    double sum = 0.0;
    for (int len : lengths) {
      if (len < 0) continue;
      ++pt.n_valid;
      sum += len;
      for (int k = std::max(len, 3); k <= 20; ++k)
        pt.cdf[static_cast<std::size_t>(k - 3)] += 1.0;
    }
    for (auto& c : pt.cdf) c /= pt.n_total;
    if (pt.n_valid > 0) {
      pt.mean = sum / pt.n_valid;
      double sq = 0.0;
      for (int len : lengths)
        if (len >= 0) sq += (len - pt.mean) * (len - pt.mean);
      pt.std_error = pt.n_valid > 1
                         ? std::sqrt(sq / (pt.n_valid - 1)) / std::sqrt(pt.n_valid)
                         : 0.0;
    } else {
      pt.mean = std::numeric_limits<double>::quiet_NaN();
      pt.std_error = std::numeric_limits<double>::quiet_NaN();
    }
    report.points.push_back(pt);
  }
  return report;
}

void write_interpolation_csv(std::ostream& out,
                             const InterpolationReport& report) {
  out << "coord,mean,stderr,n_valid,n_total";
  for (int k = 3; k <= 20; ++k) out << ",cdf_" << k;
  out << '\n';
  for (const InterpPoint& pt : report.points) {
    out << format_double(pt.coord) << ',';
    if (!std::isnan(pt.mean)) out << format_double(pt.mean);
    out << ',';
    if (!std::isnan(pt.std_error)) out << format_double(pt.std_error);
    out << ',' << pt.n_valid << ',' << pt.n_total;
    for (double c : pt.cdf) out << ',' << format_double(c);
    out << '\n';
  }
}

void write_interpolation_csv(const std::string& path,
                             const InterpolationReport& report) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_interpolation_csv(out, report);
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

double perplexity(const std::vector<Graph>& dataset, const ParamStore& ps,
                  const ModelDims& dims, const Rng& rng, int n, int threads) {
  if (dataset.empty()) throw std::invalid_argument("perplexity: empty dataset");
  if (n < 1) throw std::invalid_argument("perplexity: n < 1");
  const int g = static_cast<int>(dataset.size());
  std::vector<double> per_node = parallel_map(g, threads, [&](int i) {
    Rng episode = rng.fork("graph", static_cast<std::uint64_t>(i));
    const Graph& x = dataset[static_cast<std::size_t>(i)];
    const ElboEstimate est = elbo_estimate(x, ps, dims, episode, n);
    return -est.mean / static_cast<double>(x.node_count());
  });
  double sum = 0.0;
  for (double v : per_node) sum += v;
  return std::exp(sum / g);
}

double perplexity_from_elbos(std::span<const double> elbos,
                             std::span<const int> node_counts) {
  if (elbos.empty() || elbos.size() != node_counts.size())
    throw std::invalid_argument("perplexity_from_elbos: bad inputs");
  double sum = 0.0;
  for (std::size_t i = 0; i < elbos.size(); ++i)
    sum += -elbos[i] / node_counts[i];
  return std::exp(sum / static_cast<double>(elbos.size()));
}

}  // namespace sgvae
