#ifndef CPF_CONFIG_JSON_H
#define CPF_CONFIG_JSON_H

#include <json.hpp>

#include "cpf/dataset.h"
#include "cpf/model_config.h"
#include "cpf/records.h"
#include "cpf/trainer.h"

namespace cpf {

/// Throws ConfigError when j holds a key outside the allowed set.
void require_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                  const std::string& where);

nlohmann::json model_config_to_json(const ModelConfig& c);
ModelConfig model_config_from_json(const nlohmann::json& j, ModelConfig base = {});

nlohmann::json train_config_to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base = {});

nlohmann::json data_config_to_json(const DiscretizerSpec& spec, int window,
                                   const ColumnMapping& columns);
void data_config_from_json(const nlohmann::json& j, DiscretizerSpec& spec, int& window,
                           ColumnMapping& columns);

nlohmann::json metrics_to_json(const MetricsReport& m);

}  // namespace cpf

#endif
