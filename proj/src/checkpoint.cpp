#include "mcast/checkpoint.hpp"

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include <json.hpp>

namespace mcast {

using nlohmann::json;

namespace {

[[noreturn]] void schema_error(const std::string& what) {
  throw ConfigError(ConfigError::Kind::kSchema, "config: " + what);
}

double get_number(const json& obj, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) schema_error(std::string("'") + key + "' must be a number");
  return v.get<double>();
}

std::uint64_t get_count(const json& obj, const char* key, std::uint64_t fallback, bool required) {
  if (!obj.contains(key)) {
    if (required) schema_error(std::string("missing required key '") + key + "'");
    return fallback;
  }
  const json& v = obj.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    schema_error(std::string("'") + key + "' must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "algorithm",     "n_antennas", "n_users",      "gamma",      "sigma",      "power_bound",
      "depth",         "learning_rate", "n_batches", "batch_size", "fd_step",    "softmin_beta",
      "init_lambda",   "init_beta",  "seed",         "incremental", "adam_beta1", "adam_beta2",
      "adam_eps"};
  return keys;
}

TrainConfig config_from_json(const json& obj) {
  if (!obj.is_object()) schema_error("top level must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (!known_keys().contains(key)) schema_error("unknown key '" + key + "'");
    if (value.is_object() || value.is_array()) schema_error("'" + key + "' must be a scalar");
  }
  TrainConfig cfg;
  if (!obj.contains("algorithm") || !obj.at("algorithm").is_string()) {
    schema_error("missing required string key 'algorithm'");
  }
  try {
    cfg.algorithm = parse_algorithm(obj.at("algorithm").get<std::string>());
  } catch (const std::invalid_argument& e) {
    schema_error(e.what());
  }
  cfg.problem.n_antennas = get_count(obj, "n_antennas", 0, true);
  cfg.problem.n_users = get_count(obj, "n_users", 0, true);
  cfg.problem.snr_target = get_number(obj, "gamma", 1.0);
  cfg.problem.noise_std = get_number(obj, "sigma", 1.0);
  if (obj.contains("power_bound") && !obj.at("power_bound").is_null()) {
    cfg.power_bound = get_number(obj, "power_bound", 0.0);
  }
  cfg.depth = get_count(obj, "depth", 0, true);
  cfg.learning_rate = get_number(obj, "learning_rate", cfg.learning_rate);
  cfg.n_batches = get_count(obj, "n_batches", cfg.n_batches, false);
  cfg.batch_size = get_count(obj, "batch_size", cfg.batch_size, false);
  cfg.fd_step = get_number(obj, "fd_step", cfg.fd_step);
  cfg.softmin_beta = get_number(obj, "softmin_beta", cfg.softmin_beta);
  cfg.init_lambda = get_number(obj, "init_lambda", cfg.init_lambda);
  cfg.init_beta = get_number(obj, "init_beta", cfg.init_beta);
  cfg.seed = get_count(obj, "seed", cfg.seed, false);
  if (obj.contains("incremental")) {
    if (!obj.at("incremental").is_boolean()) schema_error("'incremental' must be a boolean");
    cfg.incremental = obj.at("incremental").get<bool>();
  }
  cfg.adam.beta1 = get_number(obj, "adam_beta1", cfg.adam.beta1);
  cfg.adam.beta2 = get_number(obj, "adam_beta2", cfg.adam.beta2);
  cfg.adam.eps = get_number(obj, "adam_eps", cfg.adam.eps);
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    schema_error(e.what());
  }
  return cfg;
}

json config_json(const TrainConfig& cfg) {
  json j;
  j["algorithm"] = to_string(cfg.algorithm);
  j["n_antennas"] = cfg.problem.n_antennas;
  j["n_users"] = cfg.problem.n_users;
  j["gamma"] = cfg.problem.snr_target;
  j["sigma"] = cfg.problem.noise_std;
  j["power_bound"] = cfg.power_bound ? json(*cfg.power_bound) : json(nullptr);
  j["depth"] = cfg.depth;
  j["learning_rate"] = cfg.learning_rate;
  j["n_batches"] = cfg.n_batches;
  j["batch_size"] = cfg.batch_size;
  j["fd_step"] = cfg.fd_step;
  j["softmin_beta"] = cfg.softmin_beta;
  j["init_lambda"] = cfg.init_lambda;
  j["init_beta"] = cfg.init_beta;
  j["seed"] = cfg.seed;
  j["incremental"] = cfg.incremental;
  j["adam_beta1"] = cfg.adam.beta1;
  j["adam_beta2"] = cfg.adam.beta2;
  j["adam_eps"] = cfg.adam.eps;
  return j;
}

[[noreturn]] void malformed(const std::string& what) {
  throw CheckpointError(CheckpointError::Kind::kMalformed, "checkpoint: " + what);
}

std::vector<double> get_doubles(const json& obj, const char* key) {
  if (!obj.contains(key) || !obj.at(key).is_array()) malformed(std::string("missing array '") + key + "'");
  std::vector<double> out;
  for (const json& v : obj.at(key)) {
    if (!v.is_number()) malformed(std::string("non-numeric entry in '") + key + "'");
    out.push_back(v.get<double>());
  }
  return out;
}

std::string read_file(const std::filesystem::path& path, bool& ok) {
  std::ifstream in(path, std::ios::binary);
  ok = static_cast<bool>(in);
  if (!ok) return {};
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256: digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 0xf]);
  }
  return out;
}

TrainConfig parse_config(std::string_view text) {
  json obj;
  try {
    obj = json::parse(text);
  } catch (const json::parse_error& e) {
    schema_error(std::string("not valid JSON: ") + e.what());
  }
  return config_from_json(obj);
}

TrainConfig load_config(const std::filesystem::path& path) {
  bool ok = false;
  const std::string text = read_file(path, ok);
  if (!ok) throw ConfigError(ConfigError::Kind::kUnreadable, "config: cannot read " + path.string());
  return parse_config(text);
}

std::string config_to_json(const TrainConfig& cfg) { return config_json(cfg).dump(); }

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  ckpt.schedule.validate();
  json payload;
  payload["format"] = kCheckpointFormat;
  payload["version"] = kCheckpointVersion;
  payload["depth"] = ckpt.schedule.depth();
  payload["lambda"] = ckpt.schedule.lambda;
  payload["beta"] = ckpt.schedule.beta;
  payload["config"] = config_json(ckpt.config);
  payload["seed"] = ckpt.config.seed;
  json doc = payload;
  doc["content_hash"] = "sha256:" + sha256_hex(payload.dump());
  return doc.dump(2) + "\n";
}

Checkpoint deserialize_checkpoint(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    malformed(std::string("not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) malformed("top level must be an object");
  if (!doc.contains("format") || doc.at("format") != kCheckpointFormat) malformed("unrecognized format");
  if (!doc.contains("version") || !doc.at("version").is_number_integer()) malformed("missing version");
  const int version = doc.at("version").get<int>();
  if (version != kCheckpointVersion) {
    throw CheckpointError(CheckpointError::Kind::kVersion,
                          "checkpoint: format version " + std::to_string(version) + " is not supported (expected " +
                              std::to_string(kCheckpointVersion) + ")");
  }
  if (!doc.contains("content_hash") || !doc.at("content_hash").is_string()) malformed("missing content_hash");
  const std::string stored = doc.at("content_hash").get<std::string>();
  json payload = doc;
  payload.erase("content_hash");
  if (stored != "sha256:" + sha256_hex(payload.dump())) {
    throw CheckpointError(CheckpointError::Kind::kHashMismatch, "checkpoint: content hash mismatch");
  }

  Checkpoint ckpt;
  ckpt.schedule.lambda = get_doubles(payload, "lambda");
  ckpt.schedule.beta = get_doubles(payload, "beta");
  if (!payload.contains("depth") || !payload.at("depth").is_number_unsigned() ||
      payload.at("depth").get<std::size_t>() != ckpt.schedule.depth()) {
    malformed("depth does not match parameter count");
  }
  try {
    ckpt.schedule.validate();
    if (!payload.contains("config")) malformed("missing config");
    ckpt.config = config_from_json(payload.at("config"));
  } catch (const std::invalid_argument& e) {
    malformed(e.what());
  } catch (const ConfigError& e) {
    malformed(e.what());
  }
  if (ckpt.config.depth != ckpt.schedule.depth()) malformed("config depth does not match schedule");
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const std::string text = serialize_checkpoint(ckpt);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError(CheckpointError::Kind::kIo, "checkpoint: cannot write " + path.string());
  out << text;
  if (!out.flush()) throw CheckpointError(CheckpointError::Kind::kIo, "checkpoint: write failed " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  bool ok = false;
  const std::string text = read_file(path, ok);
  if (!ok) throw CheckpointError(CheckpointError::Kind::kIo, "checkpoint: cannot read " + path.string());
  return deserialize_checkpoint(text);
}

void write_train_log(std::ostream& out, const std::vector<TrainLogEntry>& log) {
  out << "depth,batch_index,mean_loss,wall_time_ms\n";
  for (const TrainLogEntry& e : log) {
    out << e.depth << ',' << e.batch_index << ',' << format_double(e.mean_loss) << ','
        << format_double(std::round(e.wall_time_ms * 1000.0) / 1000.0) << '\n';
  }
}

}  // namespace mcast
