#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "dporl/rng.hpp"

namespace dporl {

/// Per-step policy over a finite state/action space. Either deterministic
/// (one action index per state) or stochastic (a probability row per state).
class Policy {
 public:
  Policy() = default;

  static Policy deterministic(int H, int S, int A, std::vector<int> actions);
  static Policy stochastic(int H, int S, int A, std::vector<double> probs);
  static Policy uniform(int H, int S, int A);

  int S() const { return S_; }
  int A() const { return A_; }
  int H() const { return H_; }
  bool is_deterministic() const { return deterministic_; }

  // Probability of taking `a` in state `s` at step `h` (0-based everywhere).
  double prob(int h, int s, int a) const;
  // Chosen action for deterministic policies.
  int action(int h, int s) const;
  int sample_action(int h, int s, Rng& rng) const;

  bool operator==(const Policy& other) const = default;

 private:
  int S_ = 0, A_ = 0, H_ = 0;
  bool deterministic_ = true;
  std::vector<int> actions_;   // [h*S+s]
  std::vector<double> probs_;  // [(h*S+s)*A+a]
};

/// Offline dataset: `count` trajectories of H transitions each, stored
/// trajectory-major.
struct Dataset {
  int H = 0;
  std::int64_t count = 0;
  std::vector<int> s, a, s_next;  // count*H each
  std::vector<double> r;

  std::size_t idx(std::int64_t traj, int h) const {
    return static_cast<std::size_t>(traj) * H + h;
  }
  bool operator==(const Dataset& other) const = default;
};

struct Violation {
  std::string constraint;
  int h = -1, s = -1, a = -1, s_next = -1;
  double magnitude = 0.0;
  std::string str() const;
};

/// Result of validating a model against its structural constraints.
struct ValidationReport {
  std::vector<Violation> violations;
  bool empty() const { return violations.empty(); }
  double worst() const;
  std::string str() const;
};

/// Output of a pessimistic offline learner: greedy policy plus the value,
/// Q and bonus tables that produced it, and run diagnostics (privacy ledger
/// text, thresholds, constants).
struct LearnedPolicy {
  Policy policy;
  std::vector<double> q_bar;    // [h][s][a], clipped pessimistic Q
  std::vector<double> v_tilde;  // [h][s]
  std::vector<double> bonus;    // [h][s][a]
  std::string ledger_text;
  std::map<std::string, double> diagnostics;

  std::size_t qidx(int h, int s, int a, int S, int A) const {
    return (static_cast<std::size_t>(h) * S + s) * A + a;
  }
};

}  // namespace dporl
