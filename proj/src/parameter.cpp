#include "cpf/parameter.h"

#include <cmath>

#include "cpf/error.h"

namespace cpf {

void init_uniform_glorot(Parameter& p, Rng& rng) {
  const auto& shape = p.value.shape();
  const int fan_in = shape.empty() ? 1 : shape[0];
  const int fan_out = shape.size() > 1 ? shape[1] : 1;
  const real_t bound = std::sqrt(6.0 / static_cast<real_t>(fan_in + fan_out));
  for (int i = 0; i < p.value.size(); ++i) {
    p.value[i] = rng.uniform(-bound, bound);
  }
}

Parameter& ParameterSet::add(const std::string& name, std::vector<int> shape) {
  if (index_.count(name)) throw ConfigError("duplicate parameter name: " + name);
  index_[name] = params_.size();
  params_.push_back(std::make_unique<Parameter>(name, std::move(shape)));
  return *params_.back();
}

Parameter& ParameterSet::get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw ConfigError("unknown parameter: " + name);
  return *params_[it->second];
}

const Parameter& ParameterSet::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ConfigError("unknown parameter: " + name);
  return *params_[it->second];
}

std::vector<Parameter*> ParameterSet::all() {
  std::vector<Parameter*> out;
  out.reserve(params_.size());
  for (auto& p : params_) out.push_back(p.get());
  return out;
}

std::vector<const Parameter*> ParameterSet::all() const {
  std::vector<const Parameter*> out;
  out.reserve(params_.size());
  for (auto& p : params_) out.push_back(p.get());
  return out;
}

void ParameterSet::zero_grads() {
  for (auto& p : params_) p->zero_grad();
}

long ParameterSet::total_entries() const {
  long n = 0;
  for (const auto& p : params_) n += p->value.size();
  return n;
}

}  // namespace cpf
