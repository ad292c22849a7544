#pragma once

#include "disc/environment.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace disc::ingest {

/// Rows are users (contexts), columns are items (actions); entries in [0, 1].
struct RatingMatrix {
  Eigen::MatrixXd values;
  std::vector<long> row_ids;  // raw dataset user ids
  std::vector<long> col_ids;  // raw dataset item ids
  std::vector<std::string> warnings;
};

struct MovieLensOptions {
  std::optional<int> users;  // random sub-selection sizes
  std::optional<int> items;
  std::uint64_t seed = 0;
};

/// u.data format: user<TAB>item<TAB>rating<TAB>timestamp. Ratings are divided by 5.
RatingMatrix parse_movielens(std::istream& in, const MovieLensOptions& options = {});
RatingMatrix parse_movielens(const std::string& path, const MovieLensOptions& options = {});

/// user_artists format with header "userID\tartistID\tweight". Binary matrix; users with
/// fewer than `min_interactions` positive entries are dropped, then artists left without
/// any interaction are dropped.
RatingMatrix parse_lastfm(std::istream& in, int min_interactions = 30);
RatingMatrix parse_lastfm(const std::string& path, int min_interactions = 30);

struct NmfOptions {
  int rank = 3;
  int max_iters = 1000;
  double tol = 1e-6;  // stop once the relative objective change falls below this
  std::uint64_t seed = 0;
};

struct NmfFactors {
  Eigen::MatrixXd w;  // rows x rank
  Eigen::MatrixXd h;  // rank x cols
  double relative_error = 0.0;     // ||M - WH||_F / ||M||_F
  std::vector<double> objective;   // ||M - WH||_F after init and after each iteration
};

/// Frobenius-loss multiplicative updates.
NmfFactors nmf(const Eigen::MatrixXd& m, const NmfOptions& options);

/// Row-major vec of the outer product a b^T.
Eigen::VectorXd outer_vec(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

struct FeatureTable {
  Environment::Table table;  // one (cols x rank^2) matrix per row of the rating matrix
  double scale = 1.0;        // every raw feature was divided by this
};

/// phi(g, j) = vec(W_g H_j^T), rescaled so ||phi|| <= 1 and, when theta* is given, phi^T theta* <= 1.
FeatureTable build_features(const NmfFactors& factors, const std::optional<Eigen::VectorXd>& theta_star = {});

/// context,action,f1..fD with 0-based ids.
void write_features_csv(const FeatureTable& features, const std::string& path);
Environment::Table read_features_csv(const std::string& path);

}  // namespace disc::ingest
