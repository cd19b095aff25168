#include "dynpop/game.hpp"

#include <cmath>
#include <sstream>

#include "dynpop/error.hpp"

namespace dynpop {

namespace {

std::string triple(int tau, int x, int a) {
  return "(tau=" + std::to_string(tau) + ", x=" + std::to_string(x) + ", a=" + std::to_string(a) + ")";
}

class ExprModel final : public GameModel {
 public:
  ExprModel(ExprTables tables, const Vector& type_mass, const ActionMask& mask) : tables_(std::move(tables)) {
    Dims dims = tables_.dims();
    prob_.resize(static_cast<std::size_t>(dims.types) * dims.states * dims.actions * dims.states);
    reward_.resize(static_cast<std::size_t>(dims.types) * dims.states * dims.actions);
    for (int t = 0; t < dims.types; ++t)
      for (int x = 0; x < dims.states; ++x)
        for (int a = 0; a < dims.actions; ++a) {
          if (!mask.allowed(t, x, a)) continue;
          for (int y = 0; y < dims.states; ++y)
            if (const auto& e = tables_.prob(t, x, a, y)) prob_[prob_index(t, x, a, y)] = CompiledExpr(*e, type_mass);
          if (const auto& e = tables_.reward(t, x, a)) reward_[reward_index(t, x, a)] = CompiledExpr(*e, type_mass);
        }
  }

  void transition_row(const SocialState& s, int tau, int x, int a, std::span<double> out) const override {
    int n = tables_.dims().states;
    for (int y = 0; y < n; ++y) {
      const auto& c = prob_[prob_index(tau, x, a, y)];
      out[y] = c ? c->eval(s) : 0.0;
    }
  }

  double reward(const SocialState& s, int tau, int x, int a) const override {
    const auto& c = reward_[reward_index(tau, x, a)];
    return c ? c->eval(s) : 0.0;
  }

  const ExprTables* expressions() const override { return &tables_; }

 private:
  std::size_t prob_index(int tau, int x, int a, int to) const {
    Dims d = tables_.dims();
    return ((static_cast<std::size_t>(tau) * d.states + x) * d.actions + a) * d.states + to;
  }
  std::size_t reward_index(int tau, int x, int a) const {
    Dims d = tables_.dims();
    return (static_cast<std::size_t>(tau) * d.states + x) * d.actions + a;
  }

  ExprTables tables_;
  std::vector<std::optional<CompiledExpr>> prob_;
  std::vector<std::optional<CompiledExpr>> reward_;
};

void dirichlet_fill(Rng& rng, std::span<double> out, double scale) {
  double total = 0.0;
  for (double& v : out) {
    v = -std::log1p(-rng.uniform());
    total += v;
  }
  for (double& v : out) v = v / total * scale;
}

}  // namespace

ExprTables::ExprTables(Dims dims)
    : dims_(dims),
      prob_(static_cast<std::size_t>(dims.types) * dims.states * dims.actions * dims.states),
      reward_(static_cast<std::size_t>(dims.types) * dims.states * dims.actions) {}

GameSpec::GameSpec(Dims dims, ActionMask mask, Vector type_mass, Vector discount, Vector rate,
                   std::shared_ptr<const GameModel> model, std::string name)
    : dims_(dims),
      mask_(std::move(mask)),
      type_mass_(std::move(type_mass)),
      discount_(std::move(discount)),
      rate_(std::move(rate)),
      model_(std::move(model)),
      name_(std::move(name)) {
  if (dims_.types < 1 || dims_.states < 1 || dims_.actions < 1)
    throw SpecError("types, states and actions must all be at least 1");
  if (!(mask_.dims() == dims_)) throw SpecError("action mask dimensions do not match the game");
  if (type_mass_.size() != dims_.types) throw SpecError("g has " + std::to_string(type_mass_.size()) + " entries, expected " + std::to_string(dims_.types));
  if (discount_.size() != dims_.types) throw SpecError("alpha has " + std::to_string(discount_.size()) + " entries, expected " + std::to_string(dims_.types));
  if (rate_.size() != dims_.types) throw SpecError("delta has " + std::to_string(rate_.size()) + " entries, expected " + std::to_string(dims_.types));
  if (!model_) throw SpecError("game has no evaluator model");
  double total = 0.0;
  for (int t = 0; t < dims_.types; ++t) {
    if (!(type_mass_(t) >= 0.0)) throw SpecError("g[" + std::to_string(t) + "] must be nonnegative");
    if (!(discount_(t) >= 0.0 && discount_(t) < 1.0)) throw SpecError("alpha[" + std::to_string(t) + "] must lie in [0,1)");
    if (!(rate_(t) > 0.0 && std::isfinite(rate_(t)))) throw SpecError("delta[" + std::to_string(t) + "] must be positive");
    total += type_mass_(t);
    for (int x = 0; x < dims_.states; ++x)
      if (mask_.count(t, x) == 0)
        throw SpecError("no allowed action at (tau=" + std::to_string(t) + ", x=" + std::to_string(x) + ")");
  }
  if (std::abs(total - 1.0) > 1e-12) throw SpecError("g must sum to 1");
}

GameSpec GameSpec::from_expressions(Dims dims, ActionMask mask, Vector type_mass, Vector discount, Vector rate,
                                    ExprTables tables, std::string name) {
  if (!(tables.dims() == dims)) throw SpecError("expression table dimensions do not match the game");
  if (type_mass.size() != dims.types) throw SpecError("g has " + std::to_string(type_mass.size()) + " entries, expected " + std::to_string(dims.types));
  for (int t = 0; t < dims.types; ++t)
    for (int x = 0; x < dims.states; ++x)
      for (int a = 0; a < dims.actions; ++a) {
        for (int y = 0; y < dims.states; ++y)
          if (const auto& e = tables.prob(t, x, a, y))
            check_references(*e, dims, mask, "transition " + triple(t, x, a) + " to " + std::to_string(y) + ": ");
        if (const auto& e = tables.reward(t, x, a)) check_references(*e, dims, mask, "reward " + triple(t, x, a) + ": ");
      }
  auto model = std::make_shared<ExprModel>(std::move(tables), type_mass, mask);
  return GameSpec(dims, std::move(mask), std::move(type_mass), std::move(discount), std::move(rate), std::move(model),
                  std::move(name));
}

GameSpec GameSpec::with_discount(Vector discount) const {
  return GameSpec(dims_, mask_, type_mass_, std::move(discount), rate_, model_, name_);
}

GameSpec GameSpec::with_rate(Vector rate) const {
  return GameSpec(dims_, mask_, type_mass_, discount_, std::move(rate), model_, name_);
}

GameSpec GameSpec::with_name(std::string name) const {
  return GameSpec(dims_, mask_, type_mass_, discount_, rate_, model_, std::move(name));
}

void GameSpec::transition_row(const SocialState& s, int tau, int x, int a, std::span<double> out) const {
  try {
    model_->transition_row(s, tau, x, a, out);
  } catch (const EvalError& e) {
    throw EvalError(std::string("transition ") + triple(tau, x, a) + ": " + e.what());
  }
  double sum = 0.0;
  for (double& v : out) {
    if (!std::isfinite(v)) throw EvalError("transition " + triple(tau, x, a) + ": non-finite probability");
    if (v < 0.0) {
      if (v < -kNegativeClip) throw EvalError("transition " + triple(tau, x, a) + ": negative probability " + std::to_string(v));
      v = 0.0;
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > kRowSumTolerance)
    throw EvalError("transition " + triple(tau, x, a) + ": row sums to " + std::to_string(sum));
  for (double& v : out) v /= sum;
}

double GameSpec::reward(const SocialState& s, int tau, int x, int a) const {
  double r = 0.0;
  try {
    r = model_->reward(s, tau, x, a);
  } catch (const EvalError& e) {
    throw EvalError(std::string("reward ") + triple(tau, x, a) + ": " + e.what());
  }
  if (!std::isfinite(r)) throw EvalError("reward " + triple(tau, x, a) + ": non-finite value");
  return r;
}

std::string Violation::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind) {
    case Kind::RowSum: os << "row-sum " << value; break;
    case Kind::NegativeProbability: os << "negative probability " << value << " to state " << to; break;
    case Kind::NonFiniteProbability: os << "non-finite probability to state " << to; break;
    case Kind::NonFiniteReward: os << "non-finite reward"; break;
  }
  os << " at " << triple(tau, x, a) << " in sample " << sample;
  return os.str();
}

ValidationReport validate_spec(const GameSpec& spec, int samples, std::uint64_t seed) {
  ValidationReport report;
  report.samples = samples;
  Rng rng(seed);
  std::vector<double> row(static_cast<std::size_t>(spec.states()));
  for (int k = 0; k < samples; ++k) {
    SocialState s = random_social_state(spec, rng);
    for (int t = 0; t < spec.types(); ++t)
      for (int x = 0; x < spec.states(); ++x)
        for (int a = 0; a < spec.actions(); ++a) {
          if (!spec.allowed(t, x, a)) continue;
          try {
            spec.model().transition_row(s, t, x, a, row);
          } catch (const EvalError& e) {
            throw EvalError(std::string("transition ") + triple(t, x, a) + ": " + e.what());
          }
          double sum = 0.0;
          bool finite = true;
          for (int y = 0; y < spec.states(); ++y) {
            double v = row[static_cast<std::size_t>(y)];
            if (!std::isfinite(v)) {
              report.violations.push_back({Violation::Kind::NonFiniteProbability, k, t, x, a, y, v});
              finite = false;
              continue;
            }
            if (v < -kNegativeClip) report.violations.push_back({Violation::Kind::NegativeProbability, k, t, x, a, y, v});
            sum += v;
          }
          if (finite && std::abs(sum - 1.0) > kRowSumTolerance)
            report.violations.push_back({Violation::Kind::RowSum, k, t, x, a, -1, sum});
          double r = 0.0;
          try {
            r = spec.model().reward(s, t, x, a);
          } catch (const EvalError& e) {
            throw EvalError(std::string("reward ") + triple(t, x, a) + ": " + e.what());
          }
          if (!std::isfinite(r)) report.violations.push_back({Violation::Kind::NonFiniteReward, k, t, x, a, -1, r});
        }
  }
  return report;
}

SocialState zero_social_state(const GameSpec& spec) {
  SocialState s;
  s.pi.table.assign(static_cast<std::size_t>(spec.types()), Matrix::Zero(spec.states(), spec.actions()));
  s.d.mass.assign(static_cast<std::size_t>(spec.types()), Vector::Zero(spec.states()));
  return s;
}

SocialState uniform_social_state(const GameSpec& spec) {
  SocialState s = zero_social_state(spec);
  for (int t = 0; t < spec.types(); ++t) {
    for (int x = 0; x < spec.states(); ++x) {
      double share = 1.0 / spec.mask().count(t, x);
      for (int a = 0; a < spec.actions(); ++a)
        if (spec.allowed(t, x, a)) s.pi.table[t](x, a) = share;
    }
    s.d.mass[t].setConstant(spec.type_mass()(t) / spec.states());
  }
  return s;
}

SocialState random_social_state(const GameSpec& spec, Rng& rng) {
  SocialState s = zero_social_state(spec);
  std::vector<double> buf;
  for (int t = 0; t < spec.types(); ++t) {
    for (int x = 0; x < spec.states(); ++x) {
      auto acts = spec.mask().actions(t, x);
      buf.resize(acts.size());
      dirichlet_fill(rng, buf, 1.0);
      for (std::size_t i = 0; i < acts.size(); ++i) s.pi.table[t](x, acts[i]) = buf[i];
    }
    buf.resize(static_cast<std::size_t>(spec.states()));
    dirichlet_fill(rng, buf, spec.type_mass()(t));
    for (int x = 0; x < spec.states(); ++x) s.d.mass[t](x) = buf[static_cast<std::size_t>(x)];
  }
  return s;
}

void check_social_state(const GameSpec& spec, const SocialState& s, double tol) {
  if (s.pi.table.size() != static_cast<std::size_t>(spec.types()) || s.d.mass.size() != static_cast<std::size_t>(spec.types()))
    throw SpecError("social state has the wrong number of types");
  for (int t = 0; t < spec.types(); ++t) {
    const Matrix& p = s.pi.table[t];
    const Vector& d = s.d.mass[t];
    if (p.rows() != spec.states() || p.cols() != spec.actions() || d.size() != spec.states())
      throw SpecError("social state dimensions do not match the game");
    for (int x = 0; x < spec.states(); ++x) {
      double sum = 0.0;
      for (int a = 0; a < spec.actions(); ++a) {
        double v = p(x, a);
        if (!spec.allowed(t, x, a) && v != 0.0) throw SpecError("policy puts mass on masked action " + triple(t, x, a));
        if (!(v >= -tol)) throw SpecError("negative policy entry at " + triple(t, x, a));
        sum += v;
      }
      if (std::abs(sum - 1.0) > tol) throw SpecError("policy row (tau=" + std::to_string(t) + ", x=" + std::to_string(x) + ") does not sum to 1");
      if (!(d(x) >= -tol)) throw SpecError("negative state mass");
    }
    if (std::abs(d.sum() - spec.type_mass()(t)) > tol)
      throw SpecError("state distribution of type " + std::to_string(t) + " does not sum to g");
  }
}

StateRate StateRate::zeros_like(const SocialState& s) {
  StateRate r;
  for (const auto& m : s.pi.table) r.pi.push_back(Matrix::Zero(m.rows(), m.cols()));
  for (const auto& v : s.d.mass) r.d.push_back(Vector::Zero(v.size()));
  return r;
}

double StateRate::pi_sup_norm() const {
  double m = 0.0;
  for (const auto& p : pi)
    if (p.size()) m = std::max(m, p.cwiseAbs().maxCoeff());
  return m;
}

double StateRate::d_sup_norm() const {
  double m = 0.0;
  for (const auto& v : d)
    if (v.size()) m = std::max(m, v.cwiseAbs().maxCoeff());
  return m;
}

double StateRate::sup_norm() const { return std::max(pi_sup_norm(), d_sup_norm()); }

SocialState advance(const SocialState& s, const StateRate& rate, double h) {
  SocialState out = s;
  for (std::size_t t = 0; t < out.pi.table.size(); ++t) {
    out.pi.table[t] += h * rate.pi[t];
    out.d.mass[t] += h * rate.d[t];
  }
  return out;
}

double sup_distance(const SocialState& a, const SocialState& b) {
  double m = 0.0;
  for (std::size_t t = 0; t < a.pi.table.size(); ++t) {
    if (a.pi.table[t].size()) m = std::max(m, (a.pi.table[t] - b.pi.table[t]).cwiseAbs().maxCoeff());
    if (a.d.mass[t].size()) m = std::max(m, (a.d.mass[t] - b.d.mass[t]).cwiseAbs().maxCoeff());
  }
  return m;
}

}  // namespace dynpop
