#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "sgvae/config.hpp"
#include "sgvae/graph.hpp"
#include "sgvae/param_store.hpp"
#include "sgvae/rng.hpp"

namespace sgvae {

// Fraction of n prior draws z ~ N(0, I) whose decoded graph is a valid
// cycle. Each draw runs on its own forked substream, so the result is
// independent of evaluation order and thread count.
double generation_accuracy(const ParamStore& ps, const ModelDims& dims,
                           const Rng& rng, int n = 100, int max_nodes = 50,
                           int threads = 1);

struct LatentRow {
  int graph_id = 0;
  int cycle_len = 0;
  std::vector<double> z;
  ConstructionOrder order;
};

// Encodes per_length fresh cycles of each length; row ids are sequential in
// (length, repeat) order.
std::vector<LatentRow> embed_corpus(const ParamStore& ps,
                                    const ModelDims& dims, const Rng& rng,
                                    int per_length = 40, int min_len = 5,
                                    int max_len = 14, int threads = 1);

// Header: graph_id,cycle_len,z0,...,z{d-1},order; order is the construction
// order as dash-separated node ids.
void write_latent_csv(std::ostream& out, const std::vector<LatentRow>& rows);
void write_latent_csv(const std::string& path,
                      const std::vector<LatentRow>& rows);

// Principal components of the centered points (covariance normalized by
// n - 1), via Jacobi eigendecomposition. Components are unit-norm rows
// ordered by explained variance, sign-fixed so each component's
// largest-magnitude entry is positive; projections are the centered points
// in the component basis.
struct PcaResult {
  std::vector<double> mean;
  std::vector<std::vector<double>> components;
  std::vector<double> variances;
  std::vector<std::vector<double>> projections;
};
PcaResult pca(const std::vector<std::vector<double>>& points);

// Indices of the largest single-linkage component under distance threshold
// eps = eps_factor * (median nearest-neighbor distance). Ties go to the
// component containing the smallest index.
std::vector<int> largest_cluster(const std::vector<std::vector<double>>& points,
                                 double eps_factor = 3.0);

// One interpolation coordinate: `samples` decodes of mean + coord * axis.
// Length statistics cover valid cycles only; cdf[k] is the fraction of ALL
// samples that are valid cycles of length <= k + 3 (columns 3..20).
struct InterpPoint {
  double coord = 0.0;
  double mean = 0.0;       // NaN when no valid cycle was produced
  double std_error = 0.0;  // sample stddev / sqrt(n_valid)
  int n_valid = 0;
  int n_total = 0;
  std::array<double, 18> cdf{};
};

struct InterpolationReport {
  std::vector<InterpPoint> points;
  std::vector<double> origin;  // PCA mean of the clustered corpus
  std::vector<double> axis;    // first principal component
};

// Restricts the corpus to its largest cluster, takes the first principal
// axis, and decodes `samples` graphs at n_points regularly spaced
// coordinates spanning the cluster's projection range.
InterpolationReport interpolation_report(const ParamStore& ps,
                                         const ModelDims& dims, const Rng& rng,
                                         const std::vector<LatentRow>& corpus,
                                         int n_points = 10, int samples = 1000,
                                         int max_nodes = 50,
                                         double eps_factor = 3.0,
                                         int threads = 1);

// Header: coord,mean,stderr,n_valid,n_total,cdf_3,...,cdf_20.
void write_interpolation_csv(std::ostream& out,
                             const InterpolationReport& report);
void write_interpolation_csv(const std::string& path,
                             const InterpolationReport& report);

// exp(mean over graphs of -elbo/node_count) with an n-sample bound estimate
// per graph.
double perplexity(const std::vector<Graph>& dataset, const ParamStore& ps,
                  const ModelDims& dims, const Rng& rng, int n,
                  int threads = 1);
double perplexity_from_elbos(std::span<const double> elbos,
                             std::span<const int> node_counts);

}  // namespace sgvae
