#include "beyond/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "beyond/content.hpp"
#include "beyond/random.hpp"

namespace beyond {

using nlohmann::json;

namespace {

constexpr std::array<const char*, 5> kContinuousNames{"setpoint_heating", "setpoint_cooling", "window_u", "shgc",
                                                      "wall_u"};

std::array<double, 5> continuous_values(const SimulationParams& p) {
  return {p.setpoint_heating, p.setpoint_cooling, p.window_u, p.shgc, p.wall_u};
}

std::string enum_value(const SimulationParams& p, const std::string& name) {
  if (name == "location") return p.location;
  if (name == "orientation") return std::string(to_string(p.orientation));
  if (name == "cooling_enabled") return p.cooling_enabled ? "true" : "false";
  if (name == "shades_on") return p.shades_on ? "true" : "false";
  throw Error(ErrorCode::IncompatibleModel, "unknown enum feature '" + name + "'");
}

// Dummy columns: one per non-reference level, tagged with the enum index.
struct Dummies {
  std::vector<double> value;
  std::vector<std::size_t> group;
};

Dummies dummies(const FeatureSpec& spec, const SimulationParams* p) {
  Dummies d;
  for (std::size_t e = 0; e < spec.enums.size(); ++e) {
    const auto& feat = spec.enums[e];
    std::size_t hit = 0;
    if (p) {
      const std::string v = enum_value(*p, feat.name);
      auto it = std::find(feat.levels.begin(), feat.levels.end(), v);
      if (it == feat.levels.end())
        throw Error(ErrorCode::IncompatibleModel, "value '" + v + "' not a level of " + feat.name);
      hit = static_cast<std::size_t>(it - feat.levels.begin());
    }
    for (std::size_t l = 1; l < feat.levels.size(); ++l) {
      d.value.push_back(hit == l ? 1.0 : 0.0);
      d.group.push_back(e);
    }
  }
  return d;
}

// Monomials over the base vector z = (continuous..., dummies...), each a
// sorted list of indices into z. Dummy powers and products of two dummies
// of the same enum are skipped: they duplicate or vanish.
using Monomial = std::vector<std::size_t>;

std::vector<Monomial> monomials(const FeatureSpec& spec, const Dummies& d) {
  const std::size_t k = spec.continuous.size();
  const std::size_t z = k + d.value.size();
  std::vector<Monomial> out;
  Monomial cur;
  auto admissible = [&](std::size_t next) {
    if (next < k) return true;
    if (!spec.full_interactions && !cur.empty()) return false;
    for (std::size_t i : cur) {
      if (i >= k && d.group[i - k] == d.group[next - k]) return false;
    }
    return true;
  };
  // Depth-first in lexicographic order, so columns are grouped by degree only
  // through the outer loop below.
  auto rec = [&](auto&& self, std::size_t from, int remaining) -> void {
    if (remaining == 0) {
      out.push_back(cur);
      return;
    }
    for (std::size_t i = from; i < z; ++i) {
      if (!admissible(i)) continue;
      cur.push_back(i);
      self(self, i, remaining - 1);
      cur.pop_back();
    }
  };
  for (int deg = 1; deg <= spec.degree; ++deg) rec(rec, 0, deg);
  return out;
}

void check_spec_shape(const FeatureSpec& spec) {
  if (spec.continuous.size() != kContinuousNames.size())
    throw Error(ErrorCode::IncompatibleModel, "feature spec must list the 5 continuous inputs");
  for (std::size_t i = 0; i < kContinuousNames.size(); ++i) {
    if (spec.continuous[i].name != kContinuousNames[i])
      throw Error(ErrorCode::IncompatibleModel, "unexpected continuous feature '" + spec.continuous[i].name + "'");
    if (!(spec.continuous[i].max > spec.continuous[i].min))
      throw Error(ErrorCode::IncompatibleModel, "degenerate range for " + spec.continuous[i].name);
  }
  if (spec.degree < 1 || spec.degree > 4) throw Error(ErrorCode::IncompatibleModel, "degree must be in 1..4");
}

HeadMetrics head_metrics(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth) {
  HeadMetrics m;
  const Eigen::VectorXd err = pred - truth;
  const double n = static_cast<double>(truth.size());
  m.rmse = std::sqrt(err.squaredNorm() / n);
  m.mae = err.cwiseAbs().sum() / n;
  const double mean = truth.mean();
  const double ss_tot = (truth.array() - mean).square().sum();
  m.target_std = std::sqrt(ss_tot / n);
  m.r2 = ss_tot > 0.0 ? 1.0 - err.squaredNorm() / ss_tot : (err.squaredNorm() == 0.0 ? 1.0 : 0.0);
  return m;
}

}  // namespace

Eigen::Index FeatureSpec::width() const {
  return static_cast<Eigen::Index>(monomials(*this, dummies(*this, nullptr)).size());
}

FeatureSpec feature_spec_for(const Dataset& data, int degree, bool full_interactions) {
  if (data.empty()) throw Error(ErrorCode::InvalidInput, "dataset is empty");
  FeatureSpec spec;
  spec.degree = degree;
  spec.full_interactions = full_interactions;
  for (std::size_t i = 0; i < kContinuousNames.size(); ++i) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& s : data) {
      const double v = continuous_values(s.params)[i];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (!(hi > lo)) hi = lo + 1.0;
    spec.continuous.push_back({kContinuousNames[i], lo, hi});
  }
  std::set<std::string> locations;
  for (const auto& s : data) locations.insert(s.params.location);
  spec.enums.push_back({"location", {locations.begin(), locations.end()}});
  EnumFeature orient{"orientation", {}};
  for (Orientation o : kOrientations) orient.levels.emplace_back(to_string(o));
  spec.enums.push_back(std::move(orient));
  spec.enums.push_back({"cooling_enabled", {"false", "true"}});
  spec.enums.push_back({"shades_on", {"false", "true"}});
  return spec;
}

namespace {

EncodedRow encode_with(const FeatureSpec& spec, const std::vector<Monomial>& terms, const SimulationParams& p) {
  EncodedRow row;
  const auto raw = continuous_values(p);
  const Dummies d = dummies(spec, &p);
  std::vector<double> c(raw.size() + d.value.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const auto& f = spec.continuous[i];
    double v = raw[i];
    if (v < f.min || v > f.max) {
      row.clamped = true;
      v = std::clamp(v, f.min, f.max);
    }
    c[i] = (v - f.min) / (f.max - f.min);
  }
  std::copy(d.value.begin(), d.value.end(), c.begin() + static_cast<std::ptrdiff_t>(raw.size()));
  row.x.resize(static_cast<Eigen::Index>(terms.size()) + 1);
  row.x(0) = 1.0;
  for (std::size_t t = 0; t < terms.size(); ++t) {
    double v = 1.0;
    for (std::size_t i : terms[t]) v *= c[i];
    row.x(static_cast<Eigen::Index>(t) + 1) = v;
  }
  return row;
}

}  // namespace

EncodedRow encode(const FeatureSpec& spec, const SimulationParams& p) {
  check_spec_shape(spec);
  return encode_with(spec, monomials(spec, dummies(spec, nullptr)), p);
}

Eigen::MatrixXd design_matrix(const FeatureSpec& spec, const Dataset& data) {
  check_spec_shape(spec);
  const auto terms = monomials(spec, dummies(spec, nullptr));
  Eigen::MatrixXd x(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(terms.size()) + 1);
  for (std::size_t r = 0; r < data.size(); ++r) {
    x.row(static_cast<Eigen::Index>(r)) = encode_with(spec, terms, data[r].params).x.transpose();
  }
  return x;
}

Eigen::MatrixXd target_matrix(const Dataset& data) {
  Eigen::MatrixXd y(static_cast<Eigen::Index>(data.size()), 2);
  for (std::size_t r = 0; r < data.size(); ++r) {
    y(static_cast<Eigen::Index>(r), 0) = data[r].result.heating;
    y(static_cast<Eigen::Index>(r), 1) = data[r].result.cooling;
  }
  return y;
}

Eigen::VectorXd penalty_diagonal(Eigen::Index cols, double lambda) {
  Eigen::VectorXd d = Eigen::VectorXd::Constant(cols, lambda);
  d(0) = 0.0;
  return d;
}

std::vector<std::size_t> split_indices(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed ^ 0x5eed5eedULL);
  rng.shuffle(idx);
  return idx;
}

std::size_t train_count(std::size_t n) { return n - n / 5; }

Dataset select_rows(const Dataset& data, const std::vector<std::size_t>& idx, std::size_t begin, std::size_t end) {
  Dataset out;
  out.reserve(end - begin);
  for (std::size_t i = begin; i < end; ++i) out.push_back(data[idx[i]]);
  return out;
}

Eigen::MatrixXd solve_ridge(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, double ridge_lambda) {
  if (!(ridge_lambda >= 0.0)) throw Error(ErrorCode::TrainingFailed, "ridge lambda must be >= 0");
  Eigen::MatrixXd a = x.transpose() * x;
  a.diagonal() += penalty_diagonal(a.rows(), ridge_lambda);
  const Eigen::MatrixXd b = x.transpose() * y;

  Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
    throw Error(ErrorCode::TrainingFailed, "normal equations are not positive definite");
  Eigen::MatrixXd w = ldlt.solve(b);
  // One step of iterative refinement tightens badly scaled systems.
  w += ldlt.solve(b - a * w);

  const double residual = (a * w - b).norm();
  if (!w.allFinite() || residual > 1e-6 * b.norm())
    throw Error(ErrorCode::TrainingFailed, "normal equations singular (residual " + std::to_string(residual) + ")");
  return w;
}

Eigen::MatrixXd fit_heads(const FeatureSpec& spec, const Dataset& train, double ridge_lambda) {
  const Eigen::MatrixXd x = design_matrix(spec, train);
  const Eigen::MatrixXd y = target_matrix(train);
  Eigen::MatrixXd w(x.cols(), 2);
  w.col(0) = solve_ridge(x, y.col(0), ridge_lambda);

  // Cooling is identically zero without cooling and predict() gates it, so
  // the cooling head only sees rows with cooling enabled.
  std::vector<Eigen::Index> rows;
  for (std::size_t r = 0; r < train.size(); ++r) {
    if (train[r].params.cooling_enabled) rows.push_back(static_cast<Eigen::Index>(r));
  }
  if (rows.empty()) {
    w.col(1).setZero();
  } else {
    w.col(1) = solve_ridge(x(rows, Eigen::all), y(rows, Eigen::seq(1, 1)), ridge_lambda);
  }
  return w;
}

SurrogateModel fit(const Dataset& data, double ridge_lambda, std::uint64_t seed, int degree, bool full_interactions) {
  if (data.size() < 50) throw Error(ErrorCode::TrainingFailed, "need at least 50 rows, got " + std::to_string(data.size()));

  const auto idx = split_indices(data.size(), seed);
  const std::size_t n_train = train_count(data.size());
  const Dataset train = select_rows(data, idx, 0, n_train);
  const Dataset test = select_rows(data, idx, n_train, data.size());

  SurrogateModel model;
  model.spec = feature_spec_for(data, degree, full_interactions);
  model.ridge_lambda = ridge_lambda;
  model.weights = fit_heads(model.spec, train, ridge_lambda);
  model.n_train = n_train;
  model.provenance.seed = seed;
  model.holdout = evaluate(model, test);
  return model;
}

Prediction predict(const SurrogateModel& model, const SimulationParams& p, const PhysicsRules& rules) {
  const EncodedRow row = encode(model.spec, p);
  if (row.x.size() != model.weights.rows() || model.weights.cols() != 2)
    throw Error(ErrorCode::IncompatibleModel, "weights do not match the feature spec");
  const Eigen::Vector2d raw = model.weights.transpose() * row.x;
  Prediction out;
  out.clamped = row.clamped;
  out.energy.heating = std::max(0.0, raw(0));
  out.energy.cooling = p.cooling_enabled ? std::max(0.0, raw(1)) : 0.0;
  out.energy.total = out.energy.heating + out.energy.cooling;
  out.energy.rating = energy_rating(out.energy.total, rules);
  return out;
}

Metrics evaluate(const SurrogateModel& model, const Dataset& data, const PhysicsRules& rules) {
  if (data.empty()) throw Error(ErrorCode::InvalidInput, "cannot evaluate on an empty dataset");
  const auto n = static_cast<Eigen::Index>(data.size());
  Eigen::VectorXd ph(n), pc(n), th(n), tc(n);
  std::size_t agree = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Sample& s = data[static_cast<std::size_t>(i)];
    const Prediction pred = predict(model, s.params, rules);
    ph(i) = pred.energy.heating;
    pc(i) = pred.energy.cooling;
    th(i) = s.result.heating;
    tc(i) = s.result.cooling;
    if (pred.energy.rating == s.result.rating) ++agree;
  }
  Metrics m;
  m.heating = head_metrics(ph, th);
  m.cooling = head_metrics(pc, tc);
  m.rating_band_agreement = static_cast<double>(agree) / static_cast<double>(n);
  m.n = data.size();
  return m;
}

json to_json(const Metrics& m) {
  auto head = [](const HeadMetrics& h) {
    return json{{"rmse", h.rmse}, {"mae", h.mae}, {"r2", h.r2}, {"target_std", h.target_std}};
  };
  return {{"heating", head(m.heating)},
          {"cooling", head(m.cooling)},
          {"rating_band_agreement", m.rating_band_agreement},
          {"n", m.n}};
}

json to_json(const SurrogateModel& model) {
  json cont = json::array();
  for (const auto& c : model.spec.continuous) cont.push_back({{"name", c.name}, {"min", c.min}, {"max", c.max}});
  json enums = json::array();
  for (const auto& e : model.spec.enums) enums.push_back({{"name", e.name}, {"levels", e.levels}});
  auto column = [&](Eigen::Index c) {
    std::vector<double> v(static_cast<std::size_t>(model.weights.rows()));
    for (Eigen::Index r = 0; r < model.weights.rows(); ++r) v[static_cast<std::size_t>(r)] = model.weights(r, c);
    return v;
  };
  return {{"schema", model.version},
          {"feature_spec",
           {{"continuous", cont},
            {"enums", enums},
            {"encoding", "minmax+dummy"},
            {"degree", model.spec.degree},
            {"full_interactions", model.spec.full_interactions}}},
          {"ridge_lambda", model.ridge_lambda},
          {"weights", {{"heating", column(0)}, {"cooling", column(1)}}},
          {"train_metrics", {{"n_train", model.n_train}, {"holdout", to_json(model.holdout)}}},
          {"provenance",
           {{"content_hash", model.provenance.content_hash},
            {"dataset_hash", model.provenance.dataset_hash},
            {"seed", model.provenance.seed}}}};
}

SurrogateModel model_from_json(const json& j) {
  try {
    SurrogateModel m;
    m.version = j.at("schema").get<std::string>();
    if (m.version != "beyond.surrogate/1") throw Error(ErrorCode::IncompatibleModel, "unsupported schema '" + m.version + "'");
    const json& fs = j.at("feature_spec");
    m.spec.degree = fs.at("degree").get<int>();
    for (const auto& c : fs.at("continuous"))
      m.spec.continuous.push_back({c.at("name").get<std::string>(), c.at("min").get<double>(), c.at("max").get<double>()});
    for (const auto& e : fs.at("enums"))
      m.spec.enums.push_back({e.at("name").get<std::string>(), e.at("levels").get<std::vector<std::string>>()});
    m.spec.full_interactions = fs.at("full_interactions").get<bool>();
    check_spec_shape(m.spec);
    m.ridge_lambda = j.at("ridge_lambda").get<double>();
    const auto h = j.at("weights").at("heating").get<std::vector<double>>();
    const auto c = j.at("weights").at("cooling").get<std::vector<double>>();
    const auto rows = static_cast<std::size_t>(m.spec.width() + 1);
    if (h.size() != rows || c.size() != rows)
      throw Error(ErrorCode::IncompatibleModel, "weight count " + std::to_string(h.size()) + " does not match " +
                                                    std::to_string(rows) + " expanded features");
    m.weights.resize(static_cast<Eigen::Index>(rows), 2);
    for (std::size_t r = 0; r < rows; ++r) {
      m.weights(static_cast<Eigen::Index>(r), 0) = h[r];
      m.weights(static_cast<Eigen::Index>(r), 1) = c[r];
    }
    const json& tm = j.at("train_metrics");
    m.n_train = tm.at("n_train").get<std::size_t>();
    const json& ho = tm.at("holdout");
    auto head = [](const json& x) {
      return HeadMetrics{x.at("rmse").get<double>(), x.at("mae").get<double>(), x.at("r2").get<double>(),
                         x.at("target_std").get<double>()};
    };
    m.holdout.heating = head(ho.at("heating"));
    m.holdout.cooling = head(ho.at("cooling"));
    m.holdout.rating_band_agreement = ho.at("rating_band_agreement").get<double>();
    m.holdout.n = ho.at("n").get<std::size_t>();
    const json& pv = j.at("provenance");
    m.provenance.content_hash = pv.at("content_hash").get<std::string>();
    m.provenance.dataset_hash = pv.at("dataset_hash").get<std::string>();
    m.provenance.seed = pv.at("seed").get<std::uint64_t>();
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::IncompatibleModel, std::string("model file: ") + e.what());
  }
}

void save_model(const SurrogateModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << to_json(model).dump(2) << '\n';
}

SurrogateModel load_model(const std::filesystem::path& path) { return model_from_json(read_json_file(path)); }

}  // namespace beyond
