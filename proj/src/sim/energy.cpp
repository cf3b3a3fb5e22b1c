#include "sermt/sim/energy.hpp"

#include <algorithm>
#include <cmath>

namespace sermt::sim {

Picojoules joules_to_pj(double joules) {
  constexpr double kMax = 1e18;  // saturate well inside int64
  return static_cast<Picojoules>(std::llround(std::clamp(joules * 1e12, -kMax, kMax)));
}
double pj_to_joules(Picojoules pj) { return static_cast<double>(pj) * 1e-12; }
Picojoules mah_to_pj(double mah, double volts) { return joules_to_pj(mah * 3.6 * volts); }
double pj_to_mah(Picojoules pj, double volts) { return pj_to_joules(pj) / (3.6 * volts); }

double energy_tx(const EnergyModel& model, std::uint64_t bits, double distance) {
  const double per_bit = model.e_amp * distance * distance + model.e_baseband + model.e_frontend;
  return static_cast<double>(bits) * per_bit;
}

double energy_rx(const EnergyModel& model, std::uint64_t bits) {
  return static_cast<double>(bits) * (model.e_baseband + model.e_frontend + model.e_lna);
}

Battery Battery::cell(Picojoules capacity, Picojoules initial) {
  const Picojoules start = std::min(capacity, initial);
  return Battery{capacity, start, start, 0, 0, false};
}

Picojoules Battery::debit(Picojoules amount) {
  if (amount <= 0) return 0;
  if (mains_powered) {
    debited += amount;  // metered, never depleted
    return amount;
  }
  const Picojoules taken = std::min(amount, remaining);
  remaining -= taken;
  debited += taken;
  return taken;
}

Picojoules Battery::recharge(Picojoules amount) {
  if (mains_powered || amount <= 0) return 0;
  const Picojoules added = std::min(amount, capacity - remaining);
  remaining += added;
  recharged += added;
  return added;
}

}  // namespace sermt::sim
