#ifndef CPF_PARAMETER_H
#define CPF_PARAMETER_H

#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "cpf/rng.h"
#include "cpf/tensor.h"

namespace cpf {

/// Trainable tensor with its gradient and Adam moment buffers.
/// All four tensors share one shape; gradients are zeroed between
/// optimizer steps by the training loop.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
  Tensor adam_m;
  Tensor adam_v;

  Parameter() = default;
  Parameter(std::string param_name, std::vector<int> shape)
      : name(std::move(param_name)),
        value(shape),
        grad(shape),
        adam_m(shape),
        adam_v(std::move(shape)) {}

  void zero_grad() { grad.zero(); }
};

/// Glorot-style uniform init: U(-sqrt(6/(fan_in+fan_out)), +sqrt(...)).
void init_uniform_glorot(Parameter& p, Rng& rng);

/// Named, insertion-ordered collection of parameters. Insertion order is
/// the canonical order for optimizer steps, clipping and checkpoints.
class ParameterSet {
public:
  Parameter& add(const std::string& name, std::vector<int> shape);
  Parameter& get(const std::string& name);
  const Parameter& get(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.count(name) > 0; }

  std::vector<Parameter*> all();
  std::vector<const Parameter*> all() const;
  size_t size() const { return params_.size(); }

  void zero_grads();
  /// Total number of scalar entries across all parameters.
  long total_entries() const;

private:
  std::vector<std::unique_ptr<Parameter>> params_;
  std::unordered_map<std::string, size_t> index_;
};

}  // namespace cpf

#endif
