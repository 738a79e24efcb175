#include "hdmf/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "hdmf/error.hpp"
#include "hdmf/factorization.hpp"

namespace hdmf {
namespace {

constexpr double kSupportThreshold = 0.1;
constexpr double kTimecourseAr = 0.9;
constexpr int kTimecourseBurnIn = 50;

struct Tile {
  std::size_t r0, r1, c0, c1;  // half-open
};

// Lays K tiles out on the grid, maximising the smallest tile side.
std::vector<Tile> layout_tiles(std::size_t K, const GridShape& grid) {
  std::size_t best_tr = 0, best_tc = 0, best_side = 0;
  for (std::size_t tr = 1; tr <= K; ++tr) {
    const std::size_t tc = (K + tr - 1) / tr;
    if (tr > grid.rows || tc > grid.cols) continue;
    const std::size_t side = std::min(grid.rows / tr, grid.cols / tc);
    if (side > best_side || (side == best_side && tr * tc < best_tr * best_tc)) {
      best_tr = tr;
      best_tc = tc;
      best_side = side;
    }
  }
  if (best_side < 2) {
    std::ostringstream msg;
    msg << "grid " << grid.rows << "x" << grid.cols << " is too small to place K_1 = " << K
        << " blobs (each blob needs a tile of at least 2x2 voxels)";
    throw ConfigError(msg.str());
  }
  std::vector<Tile> tiles;
  for (std::size_t a = 0; a < best_tr && tiles.size() < K; ++a) {
    for (std::size_t b = 0; b < best_tc && tiles.size() < K; ++b) {
      tiles.push_back({a * grid.rows / best_tr, (a + 1) * grid.rows / best_tr, b * grid.cols / best_tc,
                       (b + 1) * grid.cols / best_tc});
    }
  }
  return tiles;
}

// Gaussian bump inside a tile, cut at kSupportThreshold. `width` scales the
// Gaussian width (dilation > 1, erosion < 1); `gain` perturbs values.
template <class Gain>
void paint_blob(Matrix& m, Eigen::Index k, const Tile& t, const GridShape& grid, double width, Gain&& gain) {
  const double cr = 0.5 * static_cast<double>(t.r0 + t.r1 - 1);
  const double cc = 0.5 * static_cast<double>(t.c0 + t.c1 - 1);
  const double side = static_cast<double>(std::min(t.r1 - t.r0, t.c1 - t.c0));
  const double sigma = 0.35 * side * width;
  for (std::size_t r = t.r0; r < t.r1; ++r) {
    for (std::size_t c = t.c0; c < t.c1; ++c) {
      const double dr = static_cast<double>(r) - cr;
      const double dc = static_cast<double>(c) - cc;
      const double v = std::exp(-(dr * dr + dc * dc) / (2.0 * sigma * sigma));
      const auto s = static_cast<Eigen::Index>(r * grid.cols + c);
      m(k, s) = v >= kSupportThreshold ? std::max(0.0, v * gain()) : 0.0;
    }
  }
}

Matrix smooth_timecourses(std::size_t T, std::size_t K, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix U(static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(K));
  for (Eigen::Index k = 0; k < U.cols(); ++k) {
    double state = 0.0;
    for (int b = 0; b < kTimecourseBurnIn; ++b) state = kTimecourseAr * state + normal(rng);
    for (Eigen::Index t = 0; t < U.rows(); ++t) {
      state = kTimecourseAr * state + normal(rng);
      U(t, k) = state;
    }
    const double mean = U.col(k).mean();
    U.col(k).array() -= mean;
    const double sd = std::sqrt(U.col(k).squaredNorm() / static_cast<double>(U.rows()));
    if (sd > 0.0) U.col(k) /= sd;
  }
  return U;
}

double rms(const Matrix& m) { return std::sqrt(m.squaredNorm() / static_cast<double>(m.size())); }

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

FactorStack SyntheticGroundTruth::subject_stack(std::size_t i) const {
  FactorStack st;
  st.Vt = group_layers;
  st.Vt.front() = subject_finest.at(i);
  return st;
}

Matrix SyntheticGroundTruth::subject_scale_map(std::size_t i, int j) const {
  return subject_stack(i).scale_map(j);
}

SyntheticCohort generate_synthetic_cohort(const HierarchySpec& spec, const SyntheticOptions& opts) {
  spec.validate();
  const std::size_t S = opts.grid.rows * opts.grid.cols;
  if (S == 0) throw ConfigError("synthetic cohort: grid must be non-empty");
  if (opts.n < 1) throw ConfigError("synthetic cohort: n must be >= 1");
  if (opts.T < 2) throw ConfigError("synthetic cohort: T must be >= 2");
  if (!(opts.noise_sigma >= 0.0)) throw ConfigError("synthetic cohort: noise_sigma must be >= 0");
  if (!(opts.subject_jitter >= 0.0 && opts.subject_jitter < 1.0)) {
    throw ConfigError("synthetic cohort: subject_jitter must lie in [0, 1)");
  }
  const auto K1 = static_cast<std::size_t>(spec.K.front());
  const auto tiles = layout_tiles(K1, opts.grid);
  spec.validate(opts.T, S);

  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto sym = [&] { return 2.0 * unif(rng) - 1.0; };

  SyntheticCohort out;
  auto& truth = out.truth;
  truth.noise_sigma = opts.noise_sigma;
  truth.subject_jitter = opts.subject_jitter;
  truth.grid = opts.grid;

  Matrix finest = Matrix::Zero(static_cast<Eigen::Index>(K1), static_cast<Eigen::Index>(S));
  for (std::size_t k = 0; k < K1; ++k) {
    paint_blob(finest, static_cast<Eigen::Index>(k), tiles[k], opts.grid, 1.0, [] { return 1.0; });
  }
  normalize_rows_inf(finest);
  truth.group_layers.push_back(finest);

  // Coarser layers group consecutive (hence spatially adjacent) components.
  for (int j = 1; j < spec.h(); ++j) {
    const int coarse = spec.K[static_cast<std::size_t>(j)];
    const int fine = spec.K[static_cast<std::size_t>(j - 1)];
    Matrix merge = Matrix::Zero(coarse, fine);
    for (int c = 0; c < fine; ++c) {
      const int parent = static_cast<int>(static_cast<long long>(c) * coarse / fine);
      merge(parent, c) = 0.5 + 0.5 * unif(rng);
    }
    normalize_rows_inf(merge);
    truth.group_layers.push_back(std::move(merge));
  }

  const auto Kh = static_cast<std::size_t>(spec.K.back());
  for (std::size_t i = 0; i < opts.n; ++i) {
    Matrix sub = Matrix::Zero(static_cast<Eigen::Index>(K1), static_cast<Eigen::Index>(S));
    for (std::size_t k = 0; k < K1; ++k) {
      const double width = 1.0 + opts.subject_jitter * sym();
      paint_blob(sub, static_cast<Eigen::Index>(k), tiles[k], opts.grid, width,
                 [&] { return 1.0 + opts.subject_jitter * sym(); });
    }
    normalize_rows_inf(sub);
    truth.subject_finest.push_back(std::move(sub));

    Matrix U = smooth_timecourses(opts.T, Kh, rng);
    const Matrix Vh = truth.subject_scale_map(i, spec.h() - 1);
    const double scale = rms(U * Vh);
    if (scale > 0.0) U /= scale;
    Matrix X = U * Vh;
    if (opts.noise_sigma > 0.0) {
      std::normal_distribution<double> noise(0.0, opts.noise_sigma * rms(X));
      for (Eigen::Index t = 0; t < X.rows(); ++t) {
        for (Eigen::Index s = 0; s < X.cols(); ++s) X(t, s) += noise(rng);
      }
    }
    truth.subject_timecourses.push_back(std::move(U));

    char id[16];
    std::snprintf(id, sizeof id, "%03zu", i);
    out.cohort.subjects.push_back({id, std::move(X)});
  }
  out.cohort.graph = NeighborGraph::grid4(opts.grid.rows, opts.grid.cols);
  return out;
}

void write_ground_truth(const SyntheticGroundTruth& truth, const std::vector<std::string>& subject_ids,
                        const fs::path& dir) {
  fs::create_directories(dir);
  for (std::size_t j = 0; j < truth.group_layers.size(); ++j) {
    store_matrix(truth.group_layers[j], dir / ("Vt_group_" + std::to_string(j + 1) + ".dmat"));
  }
  for (std::size_t i = 0; i < subject_ids.size(); ++i) {
    store_matrix(truth.subject_finest[i], dir / ("Vt_" + subject_ids[i] + "_1.dmat"));
    store_matrix(truth.subject_timecourses[i], dir / ("U_" + subject_ids[i] + ".dmat"));
  }
  MetaFile meta;
  std::vector<int> K;
  for (const auto& l : truth.group_layers) K.push_back(static_cast<int>(l.rows()));
  meta.set("h", std::to_string(K.size()));
  meta.set("K", join_ints(K));
  meta.set("noise_sigma", fmt_double(truth.noise_sigma));
  meta.set("subject_jitter", fmt_double(truth.subject_jitter));
  meta.set("grid_rows", std::to_string(truth.grid.rows));
  meta.set("grid_cols", std::to_string(truth.grid.cols));
  meta.write(dir / "truth.meta");
}

}  // namespace hdmf
