#include <string>

#include "edgeids/agent.hpp"

namespace edgeids::agent {

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::size_t batch_size) : capacity_(capacity), batch_size_(batch_size) {
  if (capacity == 0) throw std::invalid_argument("replay buffer capacity must be > 0");
  if (batch_size == 0) throw std::invalid_argument("batch size must be > 0");
}

void ReplayBuffer::push(Transition t) {
  if (items_.size() == capacity_) items_.pop_front();
  items_.push_back(std::move(t));
}

std::vector<Transition> ReplayBuffer::sample(Rng& rng) const {
  if (items_.size() < batch_size_)
    throw InsufficientData("replay buffer holds " + std::to_string(items_.size()) + " transitions, batch needs " +
                           std::to_string(batch_size_));
  std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
  std::vector<Transition> out;
  out.reserve(batch_size_);
  for (std::size_t i = 0; i < batch_size_; ++i) out.push_back(items_[pick(rng)]);
  return out;
}

double ReplayBuffer::approx_bytes() const {
  if (items_.empty()) return 0.0;
  const auto& t = items_.front();
  const double per = static_cast<double>(sizeof(Transition)) +
                     static_cast<double>((t.s.latent.size() + t.s_next.latent.size()) * sizeof(double));
  return per * static_cast<double>(items_.size());
}

}  // namespace edgeids::agent
