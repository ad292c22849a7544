#include "disc/data_ingest.hpp"

#include "disc/seeding.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace disc::ingest {

namespace {

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return in;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, '\t')) fields.push_back(field);
  return fields;
}

long parse_long(const std::string& s, int line, const char* what) {
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) {
    throw std::runtime_error("line " + std::to_string(line) + ": malformed " + what + " '" + s + "'");
  }
  return v;
}

double parse_double(const std::string& s, int line, const char* what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) {
    throw std::runtime_error("line " + std::to_string(line) + ": malformed " + what + " '" + s + "'");
  }
  return v;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

/// Sorted random subset of `ids` of size k (all of them when k >= size).
std::vector<long> choose_subset(const std::vector<long>& ids, int k, Rng& rng) {
  if (k >= static_cast<int>(ids.size())) return ids;
  std::vector<long> pool = ids;
  for (int j = 0; j < k; ++j) {
    std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(j), pool.size() - 1);
    std::swap(pool[static_cast<std::size_t>(j)], pool[pick(rng)]);
  }
  pool.resize(static_cast<std::size_t>(k));
  std::sort(pool.begin(), pool.end());
  return pool;
}

RatingMatrix assemble(const std::map<std::pair<long, long>, double>& cells, const std::vector<long>& rows,
                      const std::vector<long>& cols) {
  RatingMatrix out;
  out.row_ids = rows;
  out.col_ids = cols;
  out.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  std::map<long, Eigen::Index> row_pos;
  std::map<long, Eigen::Index> col_pos;
  for (std::size_t r = 0; r < rows.size(); ++r) row_pos[rows[r]] = static_cast<Eigen::Index>(r);
  for (std::size_t c = 0; c < cols.size(); ++c) col_pos[cols[c]] = static_cast<Eigen::Index>(c);
  for (const auto& [key, value] : cells) {
    const auto r = row_pos.find(key.first);
    const auto c = col_pos.find(key.second);
    if (r != row_pos.end() && c != col_pos.end()) out.values(r->second, c->second) = value;
  }
  return out;
}

}  // namespace

RatingMatrix parse_movielens(std::istream& in, const MovieLensOptions& options) {
  std::map<std::pair<long, long>, double> cells;
  std::set<long> users;
  std::set<long> items;
  std::vector<std::string> warnings;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string text = strip_cr(raw);
    if (text.empty()) continue;
    const auto fields = split_tabs(text);
    if (fields.size() != 4) {
      throw std::runtime_error("line " + std::to_string(line) + ": expected 4 tab-separated fields, got " +
                               std::to_string(fields.size()));
    }
    const long user = parse_long(fields[0], line, "user id");
    const long item = parse_long(fields[1], line, "item id");
    const double rating = parse_double(fields[2], line, "rating");
    parse_long(fields[3], line, "timestamp");
    if (rating < 0.0 || rating > 5.0) {
      throw std::runtime_error("line " + std::to_string(line) + ": rating outside [0, 5]");
    }
    const auto [it, inserted] = cells.insert_or_assign({user, item}, rating / 5.0);
    if (!inserted) {
      warnings.push_back("line " + std::to_string(line) + ": duplicate rating for user " + std::to_string(user) +
                         ", item " + std::to_string(item) + " (last value kept)");
    }
    users.insert(user);
    items.insert(item);
  }
  if (cells.empty()) throw std::runtime_error("movielens input contains no ratings");

  std::vector<long> rows(users.begin(), users.end());
  std::vector<long> cols(items.begin(), items.end());
  Rng rng(options.seed);
  if (options.users) rows = choose_subset(rows, *options.users, rng);
  if (options.items) cols = choose_subset(cols, *options.items, rng);
  RatingMatrix out = assemble(cells, rows, cols);
  out.warnings = std::move(warnings);
  return out;
}

RatingMatrix parse_movielens(const std::string& path, const MovieLensOptions& options) {
  auto in = open_input(path);
  try {
    return parse_movielens(in, options);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

RatingMatrix parse_lastfm(std::istream& in, int min_interactions) {
  std::map<std::pair<long, long>, double> cells;
  std::map<long, int> per_user;
  std::string raw;
  int line = 0;
  bool saw_header = false;
  while (std::getline(in, raw)) {
    ++line;
    const std::string text = strip_cr(raw);
    if (text.empty()) continue;
    const auto fields = split_tabs(text);
    if (!saw_header) {
      saw_header = true;
      if (!fields.empty() && fields[0] == "userID") continue;
    }
    if (fields.size() != 3) {
      throw std::runtime_error("line " + std::to_string(line) + ": expected 3 tab-separated fields, got " +
                               std::to_string(fields.size()));
    }
    const long user = parse_long(fields[0], line, "user id");
    const long artist = parse_long(fields[1], line, "artist id");
    const double weight = parse_double(fields[2], line, "weight");
    if (weight <= 0.0) continue;
    if (cells.insert_or_assign({user, artist}, 1.0).second) ++per_user[user];
  }
  if (cells.empty()) throw std::runtime_error("lastfm input contains no interactions");

  std::vector<long> rows;
  for (const auto& [user, count] : per_user) {
    if (count >= min_interactions) rows.push_back(user);
  }
  const std::set<long> kept(rows.begin(), rows.end());
  std::set<long> artists;
  for (const auto& [key, value] : cells) {
    if (kept.count(key.first)) artists.insert(key.second);
  }
  if (rows.empty() || artists.empty()) {
    throw std::runtime_error("no user has at least " + std::to_string(min_interactions) + " interactions");
  }
  return assemble(cells, rows, std::vector<long>(artists.begin(), artists.end()));
}

RatingMatrix parse_lastfm(const std::string& path, int min_interactions) {
  auto in = open_input(path);
  try {
    return parse_lastfm(in, min_interactions);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

NmfFactors nmf(const Eigen::MatrixXd& m, const NmfOptions& options) {
  if (options.rank < 1) throw std::invalid_argument("nmf: rank must be >= 1");
  if (options.rank > std::min(m.rows(), m.cols())) {
    throw std::invalid_argument("nmf: rank " + std::to_string(options.rank) + " exceeds min(rows, cols) = " +
                                std::to_string(std::min(m.rows(), m.cols())));
  }
  if ((m.array() < 0.0).any()) throw std::invalid_argument("nmf: input has negative entries");

  constexpr double kEps = 1e-12;
  Rng rng(options.seed);
  // uniform on (0, 1]
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto draw = [&] { return 1.0 - unit(rng); };

  NmfFactors f;
  f.w.resize(m.rows(), options.rank);
  f.h.resize(options.rank, m.cols());
  for (Eigen::Index i = 0; i < f.w.size(); ++i) f.w.data()[i] = draw();
  for (Eigen::Index i = 0; i < f.h.size(); ++i) f.h.data()[i] = draw();

  const double norm_m = m.norm();
  f.objective.push_back((m - f.w * f.h).norm());
  for (int it = 0; it < options.max_iters; ++it) {
    const Eigen::MatrixXd wt_m = f.w.transpose() * m;
    const Eigen::MatrixXd wt_wh = (f.w.transpose() * f.w) * f.h;
    f.h.array() *= wt_m.array() / (wt_wh.array() + kEps);

    const Eigen::MatrixXd m_ht = m * f.h.transpose();
    const Eigen::MatrixXd w_hht = f.w * (f.h * f.h.transpose());
    f.w.array() *= m_ht.array() / (w_hht.array() + kEps);

    const double previous = f.objective.back();
    const double current = (m - f.w * f.h).norm();
    f.objective.push_back(current);
    if (previous <= 0.0 || (previous - current) / previous < options.tol) break;
  }
  f.relative_error = norm_m > 0.0 ? f.objective.back() / norm_m : f.objective.back();
  return f;
}

Eigen::VectorXd outer_vec(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  Eigen::VectorXd out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

FeatureTable build_features(const NmfFactors& factors, const std::optional<Eigen::VectorXd>& theta_star) {
  const Eigen::Index rank = factors.w.cols();
  const Eigen::Index d = rank * rank;
  if (theta_star && theta_star->size() != d) {
    throw std::invalid_argument("build_features: theta* has dimension " + std::to_string(theta_star->size()) +
                                ", expected rank^2 = " + std::to_string(d));
  }
  FeatureTable out;
  out.table.reserve(static_cast<std::size_t>(factors.w.rows()));
  double scale = 1.0;
  for (Eigen::Index g = 0; g < factors.w.rows(); ++g) {
    Eigen::MatrixXd rows(factors.h.cols(), d);
    const Eigen::VectorXd wg = factors.w.row(g).transpose();
    for (Eigen::Index j = 0; j < factors.h.cols(); ++j) rows.row(j) = outer_vec(wg, factors.h.col(j)).transpose();
    scale = std::max(scale, rows.rowwise().norm().maxCoeff());
    if (theta_star) scale = std::max(scale, (rows * *theta_star).maxCoeff());
    out.table.push_back(std::move(rows));
  }
  for (auto& m : out.table) m /= scale;
  out.scale = scale;
  return out;
}

void write_features_csv(const FeatureTable& features, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.precision(17);
  const Eigen::Index d = features.table.empty() ? 0 : features.table.front().cols();
  out << "context,action";
  for (Eigen::Index k = 0; k < d; ++k) out << ",f" << (k + 1);
  out << '\n';
  for (std::size_t c = 0; c < features.table.size(); ++c) {
    const auto& m = features.table[c];
    for (Eigen::Index x = 0; x < m.rows(); ++x) {
      out << c << ',' << x;
      for (Eigen::Index k = 0; k < d; ++k) out << ',' << m(x, k);
      out << '\n';
    }
  }
  if (!out) throw std::runtime_error("write failed for " + path);
}

Environment::Table read_features_csv(const std::string& path) {
  auto in = open_input(path);
  std::string raw;
  if (!std::getline(in, raw)) throw std::runtime_error(path + ": empty feature file");
  const std::string header = strip_cr(raw);
  const auto columns = std::count(header.begin(), header.end(), ',') + 1;
  if (header.rfind("context,action", 0) != 0 || columns < 3) {
    throw std::runtime_error(path + ": expected header 'context,action,f1,...'");
  }
  const auto d = static_cast<Eigen::Index>(columns - 2);

  std::vector<std::tuple<long, long, Eigen::VectorXd>> rows;
  long max_context = -1;
  long max_action = -1;
  int line = 1;
  while (std::getline(in, raw)) {
    ++line;
    const std::string text = strip_cr(raw);
    if (text.empty()) continue;
    std::vector<std::string> fields;
    std::istringstream ss(text);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (static_cast<long>(fields.size()) != columns) {
      throw std::runtime_error(path + ": line " + std::to_string(line) + ": expected " + std::to_string(columns) +
                               " fields");
    }
    const long c = parse_long(fields[0], line, "context id");
    const long x = parse_long(fields[1], line, "action id");
    if (c < 0 || x < 0) throw std::runtime_error(path + ": line " + std::to_string(line) + ": negative id");
    Eigen::VectorXd phi(d);
    for (Eigen::Index k = 0; k < d; ++k) phi(k) = parse_double(fields[static_cast<std::size_t>(k + 2)], line, "feature");
    max_context = std::max(max_context, c);
    max_action = std::max(max_action, x);
    rows.emplace_back(c, x, std::move(phi));
  }
  if (rows.empty()) throw std::runtime_error(path + ": no feature rows");
  const auto expected = static_cast<std::size_t>((max_context + 1) * (max_action + 1));
  if (rows.size() != expected) {
    throw std::runtime_error(path + ": feature table is not a complete context x action grid");
  }
  Environment::Table table(static_cast<std::size_t>(max_context + 1), Eigen::MatrixXd::Zero(max_action + 1, d));
  for (auto& [c, x, phi] : rows) table[static_cast<std::size_t>(c)].row(x) = phi.transpose();
  return table;
}

}  // namespace disc::ingest
