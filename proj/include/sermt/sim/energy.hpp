#pragma once

#include <cstdint>

namespace sermt::sim {

/// Integer picojoules keep the per-node ledger exact.
using Picojoules = std::int64_t;

Picojoules joules_to_pj(double joules);
double pj_to_joules(Picojoules pj);
Picojoules mah_to_pj(double mah, double volts);
double pj_to_mah(Picojoules pj, double volts);

/// First-order radio model plus per-primitive computation costs. Defaults are
/// calibration values, not measurements.
struct EnergyModel {
  double e_amp = 100e-12;      // J/bit/m^2, power amplifier
  double e_baseband = 50e-9;   // J/bit, baseband DSP
  double e_frontend = 50e-9;   // J/bit, front-end circuit
  double e_lna = 50e-9;        // J/bit, low-noise amplifier
  double volts = 3.0;          // nominal cell voltage for mAh <-> J
  double recharge_rate = 0.01;  // mAh/s harvested by ES and PDC nodes
  double battery_capacity_es = 2000.0;  // mAh
  double initial_battery = 150.0;       // mAh, every battery-powered node

  double e_sha1_block = 20e-6;  // J per SHA-1 compression
  double e_rc5_block = 2e-6;    // J per RC5 block
  double e_ecc_mul = 5e-3;      // J per elliptic-curve scalar multiplication
};

/// bits * (e_amp * distance^2 + E_B + E_F)
double energy_tx(const EnergyModel& model, std::uint64_t bits, double distance);
/// bits * (E_B + E_F + E_L)
double energy_rx(const EnergyModel& model, std::uint64_t bits);

struct Battery {
  Picojoules capacity = 0;
  Picojoules initial = 0;
  Picojoules remaining = 0;
  Picojoules debited = 0;
  Picojoules recharged = 0;
  bool mains_powered = false;

  static Battery mains() { return Battery{0, 0, 0, 0, 0, true}; }
  static Battery cell(Picojoules capacity, Picojoules initial);

  /// Debits min(amount, remaining); returns the amount actually taken.
  Picojoules debit(Picojoules amount);
  /// Adds up to capacity; returns the amount actually added.
  Picojoules recharge(Picojoules amount);

  /// initial - remaining == debited - recharged
  bool conserved() const { return mains_powered || initial - remaining == debited - recharged; }
};

}  // namespace sermt::sim
