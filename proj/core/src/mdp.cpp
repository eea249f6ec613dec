#include "npglab/mdp.hpp"

#include <algorithm>
#include <cassert>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace npglab {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

std::vector<Violation> validate(const Mdp& mdp, RewardMode mode) {
  std::vector<Violation> out;
  if (mdp.n_states < 1 || mdp.n_actions < 1) {
    out.push_back({"dimensions must be positive", -1, -1, 0.0});
    return out;
  }
  const std::size_t sa = static_cast<std::size_t>(mdp.n_states) * mdp.n_actions;
  if (mdp.reward.size() != sa) {
    out.push_back({"reward table has wrong size", -1, -1,
                   static_cast<double>(mdp.reward.size())});
    return out;
  }
  if (mdp.transition.size() != sa * mdp.n_states) {
    out.push_back({"transition tensor has wrong size", -1, -1,
                   static_cast<double>(mdp.transition.size())});
    return out;
  }
  if (!(mdp.discount > 0.0 && mdp.discount < 1.0)) {
    out.push_back({"discount must lie strictly in (0,1)", -1, -1, mdp.discount});
  }
  for (int s = 0; s < mdp.n_states; ++s) {
    for (int a = 0; a < mdp.n_actions; ++a) {
      double sum = 0.0;
      for (int s2 = 0; s2 < mdp.n_states; ++s2) {
        const double v = mdp.p(s, a, s2);
        if (!(v >= 0.0)) {  // catches negatives and NaN
          out.push_back({"negative or non-finite transition probability", s, a, v});
        }
        sum += v;
      }
      if (std::abs(sum - 1.0) > kDistributionTol) {
        out.push_back({"transition row does not sum to 1", s, a, sum - 1.0});
      }
      const double rv = mdp.r(s, a);
      if (!std::isfinite(rv)) {
        out.push_back({"non-finite reward", s, a, rv});
      } else if (mode == RewardMode::kStrict && (rv < 0.0 || rv > 1.0)) {
        out.push_back({"reward outside [0,1]", s, a, rv});
      }
    }
  }
  return out;
}

std::string describe(const std::vector<Violation>& violations) {
  std::ostringstream os;
  for (const auto& v : violations) {
    os << v.what;
    if (v.s >= 0) os << " at (s=" << v.s << ",a=" << v.a << ")";
    os << " [magnitude " << v.magnitude << "]\n";
  }
  return os.str();
}

Mdp random_mdp(RngSeed seed, int n_states, int n_actions, double gamma) {
  require(n_states >= 1, "random_mdp: n_states must be >= 1");
  require(n_actions >= 1, "random_mdp: n_actions must be >= 1");
  require(gamma > 0.0 && gamma < 1.0, "random_mdp: gamma must lie in (0,1)");

  Mdp mdp;
  mdp.n_states = n_states;
  mdp.n_actions = n_actions;
  mdp.discount = gamma;
  mdp.reward.resize(static_cast<std::size_t>(n_states) * n_actions);
  mdp.transition.resize(mdp.reward.size() * n_states);
  mdp.seed_metadata = SeedMetadata{kGeneratorId, seed.seed};

  UniformSource rng(seed.seed);
  for (double& r : mdp.reward) r = rng.next();
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) {
      double sum = 0.0;
      for (int s2 = 0; s2 < n_states; ++s2) {
        const double u = rng.next();
        mdp.p(s, a, s2) = u;
        sum += u;
      }
      if (sum == 0.0) {
        // All-zero row has probability ~0 but a deterministic fallback keeps
        // the generator total.
        mdp.p(s, a, 0) = 1.0;
        continue;
      }
      for (int s2 = 0; s2 < n_states; ++s2) mdp.p(s, a, s2) /= sum;
    }
  }
  return mdp;
}

Mdp bandit_mdp(const std::vector<double>& rewards, double gamma, RewardMode mode) {
  require(!rewards.empty(), "bandit_mdp: need at least one action");
  require(gamma > 0.0 && gamma < 1.0, "bandit_mdp: gamma must lie in (0,1)");
  for (double r : rewards) {
    require(std::isfinite(r), "bandit_mdp: rewards must be finite");
    if (mode == RewardMode::kStrict) {
      require(r >= 0.0 && r <= 1.0, "bandit_mdp: rewards must lie in [0,1]");
    }
  }
  Mdp mdp;
  mdp.n_states = 1;
  mdp.n_actions = static_cast<int>(rewards.size());
  mdp.discount = gamma;
  mdp.reward = rewards;
  mdp.transition.assign(rewards.size(), 1.0);  // every action self-loops
  return mdp;
}

Policy uniform_policy(int n_states, int n_actions) {
  require(n_states >= 1 && n_actions >= 1, "uniform_policy: dimensions must be >= 1");
  Policy pi;
  pi.n_states = n_states;
  pi.n_actions = n_actions;
  const double l = n_actions == 1 ? 0.0 : -std::log(static_cast<double>(n_actions));
  pi.log_prob.assign(static_cast<std::size_t>(n_states) * n_actions, l);
  return pi;
}

InitialDist uniform_dist(int n_states) {
  require(n_states >= 1, "uniform_dist: n_states must be >= 1");
  return InitialDist{std::vector<double>(
      n_states, 1.0 / static_cast<double>(n_states))};
}

InitialDist delta_dist(int n_states, int s) {
  require(n_states >= 1 && s >= 0 && s < n_states, "delta_dist: state out of range");
  InitialDist d{std::vector<double>(n_states, 0.0)};
  d.rho[s] = 1.0;
  return d;
}

bool is_distribution(const InitialDist& rho) {
  double sum = 0.0;
  for (double v : rho.rho) {
    if (!(v >= 0.0)) return false;
    sum += v;
  }
  return std::abs(sum - 1.0) <= kDistributionTol;
}

double max_row_normalization_defect(const Policy& policy) {
  double worst = 0.0;
  for (int s = 0; s < policy.n_states; ++s) {
    double mx = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < policy.n_actions; ++a) mx = std::max(mx, policy.log_p(s, a));
    if (!std::isfinite(mx)) return std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (int a = 0; a < policy.n_actions; ++a) sum += std::exp(policy.log_p(s, a) - mx);
    worst = std::max(worst, std::abs(mx + std::log(sum)));
  }
  return worst;
}

}  // namespace npglab
