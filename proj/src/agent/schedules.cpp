#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "edgeids/agent.hpp"

namespace edgeids::agent {

double robbins_monro_eta(std::size_t k, double p) {
  if (k < 1) throw std::invalid_argument("robbins_monro_eta: k must be >= 1");
  if (!(p > 0.5 && p < 1.0)) throw std::invalid_argument("robbins_monro_eta: p must lie in (0.5, 1)");
  return std::pow(static_cast<double>(k), -p);
}

double decay_epsilon(double eps, double eps_min, double decay) {
  if (!(decay > 0.0 && decay < 1.0)) throw std::invalid_argument("epsilon decay must lie in (0, 1)");
  if (!(eps_min >= 0.0)) throw std::invalid_argument("epsilon floor must be >= 0");
  return std::max(eps_min, eps * decay);
}

double normalize_epsilon(double eps, double unit) {
  if (!(eps >= 0.0) || !std::isfinite(eps)) throw std::invalid_argument("epsilon must be finite and >= 0");
  if (!(unit > 0.0)) throw std::invalid_argument("epsilon unit must be > 0");
  return std::min(1.0, eps * unit);
}

double PowerSchedule::at(std::size_t k) const { return eta0 / std::pow(1.0 + static_cast<double>(k) / k0, p); }

void PowerSchedule::validate() const {
  if (!(eta0 > 0.0) || !std::isfinite(eta0)) throw std::invalid_argument("schedule eta0 must be > 0");
  if (!(k0 > 0.0)) throw std::invalid_argument("schedule k0 must be > 0");
  if (!(p > 0.5 && p <= 1.0)) throw std::invalid_argument("schedule exponent must lie in (0.5, 1]");
}

void TwoTimescale::validate() const {
  supervised.validate();
  reinforcement.validate();
  if (!(reinforcement.p > supervised.p))
    throw std::invalid_argument("two-timescale: reinforcement exponent must exceed the supervised one");
}

void AgentHyperparams::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in (0, 1)");
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw std::invalid_argument("epsilon must be >= 0");
  if (!(epsilon_unit > 0.0)) throw std::invalid_argument("epsilon_unit must be > 0");
  if (!(epsilon_min >= 0.0 && epsilon_min <= 1.0)) throw std::invalid_argument("epsilon_min must lie in [0, 1]");
  if (!(epsilon_decay > 0.0 && epsilon_decay <= 1.0)) throw std::invalid_argument("epsilon_decay must lie in (0, 1]");
  if (!(lr > 0.0) || !std::isfinite(lr)) throw std::invalid_argument("lr must be > 0");
  if (target_sync_every == 0) throw std::invalid_argument("target_sync_every must be > 0");
  if (replay_capacity == 0 || batch_size == 0) throw std::invalid_argument("replay capacity and batch size must be > 0");
  if (batch_size > replay_capacity) throw std::invalid_argument("batch size exceeds replay capacity");
  if (!(carbon_xi >= 0.0)) throw std::invalid_argument("carbon_xi must be >= 0");
  for (auto h : hidden)
    if (h == 0) throw std::invalid_argument("hidden layer sizes must be > 0");
}

}  // namespace edgeids::agent
