#pragma once

#include <optional>
#include <span>

namespace ergc {

/// Running Novikov cost `∫|h|² ds` of the control against its budget K.
///
/// The stopping time is resolved per step: the control acts on a step only if
/// the cost is still below the budget when the step starts. After the step
/// that reaches the budget the ledger is frozen.
class GirsanovLedger {
 public:
  explicit GirsanovLedger(double budget = 0.0);

  double cost() const { return cost_; }
  double budget() const { return budget_; }
  double time() const { return time_; }
  bool stopped() const { return stopped_; }
  bool control_active() const { return !stopped_; }
  std::optional<double> stop_time() const { return stop_time_; }
  /// Largest single-step cost increment seen so far.
  double max_increment() const { return max_increment_; }

  /// Books one step of length dt with shift h. No-op on the cost once stopped.
  void update(std::span<const double> h, double dt);
  /// Advances time without a control (used when the control is inactive).
  void advance(double dt) { update({}, dt); }

  /// cost <= budget + max_increment.
  bool invariant_holds() const;

  friend bool operator==(const GirsanovLedger&, const GirsanovLedger&) = default;

 private:
  double budget_;
  double cost_ = 0.0;
  double time_ = 0.0;
  double max_increment_ = 0.0;
  bool stopped_ = false;
  std::optional<double> stop_time_;
};

/// Value-returning form of GirsanovLedger::update.
GirsanovLedger ledger_update(GirsanovLedger ledger, std::span<const double> h, double dt);

}  // namespace ergc
