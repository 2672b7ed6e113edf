#include "ergc/forcing/girsanov_ledger.hpp"

#include <algorithm>

#include "ergc/error.hpp"

namespace ergc {

GirsanovLedger::GirsanovLedger(double budget) : budget_(budget) {
  if (budget_ <= 0.0) {
    stopped_ = true;
    stop_time_ = 0.0;
  }
}

void GirsanovLedger::update(std::span<const double> h, double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("ledger_update: dt must be positive");
  time_ += dt;
  if (stopped_) return;
  double h2 = 0.0;
  for (double x : h) h2 += x * x;
  const double inc = h2 * dt;
  cost_ += inc;
  max_increment_ = std::max(max_increment_, inc);
  if (cost_ >= budget_) {
    stopped_ = true;
    stop_time_ = time_;
  }
}

bool GirsanovLedger::invariant_holds() const { return cost_ <= budget_ + max_increment_ || cost_ == 0.0; }

GirsanovLedger ledger_update(GirsanovLedger ledger, std::span<const double> h, double dt) {
  ledger.update(h, dt);
  return ledger;
}

}  // namespace ergc
