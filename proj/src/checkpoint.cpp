#include "cpf/checkpoint.h"

#include <cstdint>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "cpf/config_json.h"
#include "cpf/error.h"

namespace cpf {

using nlohmann::json;

// Single-file container: magic, length-prefixed JSON header describing the
// model, then the raw 64-bit values of every parameter tensor with its Adam
// moments in declaration order. Raw bytes round-trip bit-exactly.
namespace {

constexpr char kMagic[8] = {'C', 'P', 'F', 'C', 'K', 'P', 'T', '1'};

void write_u64(std::ofstream& out, uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

uint64_t read_u64(std::ifstream& in) {
  uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

void write_tensor(std::ofstream& out, const Tensor& t) {
  out.write(reinterpret_cast<const char*>(t.data()),
            static_cast<std::streamsize>(sizeof(real_t)) * t.size());
}

void read_tensor(std::ifstream& in, Tensor& t) {
  in.read(reinterpret_cast<char*>(t.data()),
          static_cast<std::streamsize>(sizeof(real_t)) * t.size());
}

}  // namespace

void save_checkpoint(const CpfModel& model, const CheckpointExtras& extras,
                     const std::string& path) {
  json header;
  header["model_config"] = model_config_to_json(model.config());
  header["exercise_concept"] = model.exercise_skill();
  json edges = json::array();
  const PMatrix& p = model.p_matrix();
  for (int i = 0; i < p.k; ++i) {
    for (int c = 0; c < p.k; ++c) {
      if (p.edge(i, c)) edges.push_back(json::array({i, c}));
    }
  }
  header["p_edges"] = std::move(edges);
  header["adam_step"] = extras.adam_step;
  header["seed"] = extras.seed;
  header["fold"] = extras.fold;
  header["difficulty_table"] = extras.difficulty_table;
  json params = json::array();
  for (const Parameter* param : model.params().all()) {
    params.push_back(json{{"name", param->name}, {"shape", param->value.shape()}});
  }
  header["params"] = std::move(params);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint " + path);
  out.write(kMagic, sizeof(kMagic));
  const std::string head = header.dump();
  write_u64(out, head.size());
  out.write(head.data(), static_cast<std::streamsize>(head.size()));
  for (const Parameter* param : model.params().all()) {
    write_tensor(out, param->value);
    write_tensor(out, param->adam_m);
    write_tensor(out, param->adam_v);
  }
  if (!out) throw DataError("short write while saving checkpoint " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read checkpoint " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw DataError("unrecognized checkpoint format in " + path);
  }
  const uint64_t head_len = read_u64(in);
  std::string head(head_len, '\0');
  in.read(head.data(), static_cast<std::streamsize>(head_len));
  if (!in) throw DataError("truncated checkpoint header in " + path);
  const json header = json::parse(head);

  const ModelConfig config = model_config_from_json(header.at("model_config"));
  const auto exercise_skill = header.at("exercise_concept").get<std::vector<int>>();
  std::vector<std::pair<int, int>> edges;
  for (const auto& e : header.at("p_edges")) {
    edges.emplace_back(e[0].get<int>(), e[1].get<int>());
  }
  Checkpoint ckpt;
  ckpt.extras.adam_step = header.at("adam_step").get<long>();
  ckpt.extras.seed = header.at("seed").get<uint64_t>();
  ckpt.extras.fold = header.value("fold", 0);
  if (header.contains("difficulty_table")) {
    ckpt.extras.difficulty_table = header["difficulty_table"].get<std::vector<int>>();
  }
  ckpt.model = std::make_unique<CpfModel>(config, exercise_skill,
                                          PMatrix::from_edges(config.k_concepts, edges),
                                          ckpt.extras.seed);
  for (const auto& pj : header.at("params")) {
    const std::string name = pj.at("name").get<std::string>();
    if (!ckpt.model->params().contains(name)) {
      throw DataError("checkpoint parameter not in model: " + name);
    }
    Parameter& param = ckpt.model->params().get(name);
    const auto shape = pj.at("shape").get<std::vector<int>>();
    if (shape != param.value.shape()) {
      throw DataError("checkpoint shape mismatch for " + name);
    }
    read_tensor(in, param.value);
    read_tensor(in, param.adam_m);
    read_tensor(in, param.adam_v);
  }
  if (!in) throw DataError("truncated checkpoint payload in " + path);
  return ckpt;
}

}  // namespace cpf
