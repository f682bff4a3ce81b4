#include "pressure_id/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

#include "json.hpp"
#include "pressure_id/errors.hpp"

namespace pressure_id {
namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int s = 0; s < 32; s += 8) out.push_back(static_cast<char>((v >> s) & 0xFF));
}
void put_u64(std::string& out, std::uint64_t v) {
  for (int s = 0; s < 64; s += 8) out.push_back(static_cast<char>((v >> s) & 0xFF));
}
std::uint64_t get_le(const unsigned char* p, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

}  // namespace

std::string model_config_to_json(const ModelConfig& c) {
  nlohmann::ordered_json j;
  j["format_version"] = kCheckpointVersion;
  j["encoder_variant"] = std::string(to_string(c.encoder.variant));
  j["embedding_dim"] = c.encoder.embedding_dim;
  j["decoder_sharing"] = std::string(to_string(c.decoder_sharing));
  j["class_count"] = c.class_count;
  j["projection_head"] = c.projection_head;
  j["input_scale"] = c.input_scale;
  return j.dump(2) + "\n";
}

ModelConfig model_config_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    ModelConfig c;
    c.encoder.variant = encoder_variant_from_string(j.at("encoder_variant").get<std::string>());
    c.encoder.embedding_dim = j.at("embedding_dim").get<int>();
    c.decoder_sharing = decoder_sharing_from_string(j.at("decoder_sharing").get<std::string>());
    c.class_count = j.at("class_count").get<int>();
    c.projection_head = j.value("projection_head", false);
    c.input_scale = j.value("input_scale", 1.0);
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed model config: ") + e.what());
  }
}

void save_checkpoint(const BranchModel& model, const std::filesystem::path& path) {
  auto copy = model.clone();
  const auto params = copy.parameters();
  const std::string config = model_config_to_json(model.config());

  std::string bytes = "PRCK";
  put_u32(bytes, kCheckpointVersion);
  put_u32(bytes, static_cast<std::uint32_t>(config.size()));
  bytes += config;
  std::uint64_t total = 0;
  for (const auto* p : params) total += p->value.size();
  put_u64(bytes, total);
  for (const auto* p : params)
    for (double v : p->value) put_u64(bytes, std::bit_cast<std::uint64_t>(v));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");

  auto sidecar = path;
  sidecar.replace_extension(".json");
  std::ofstream side(sidecar, std::ios::trunc);
  if (!side) throw IoError("cannot open '" + sidecar.string() + "' for writing");
  side << config;
}

BranchModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "PRCK", 4) != 0)
    throw FormatError("'" + path.string() + "' is not a checkpoint (bad magic)");
  if (bytes.size() < 12) throw CorruptionError("checkpoint header is truncated");
  const auto version = static_cast<std::uint32_t>(get_le(bytes.data() + 4, 4));
  if (version != kCheckpointVersion) throw FormatError("unsupported checkpoint version " + std::to_string(version));
  const auto config_len = static_cast<std::size_t>(get_le(bytes.data() + 8, 4));
  if (bytes.size() < 12 + config_len + 8) throw CorruptionError("checkpoint config is truncated");
  const ModelConfig config =
      model_config_from_json(std::string_view(reinterpret_cast<const char*>(bytes.data() + 12), config_len));
  const unsigned char* p = bytes.data() + 12 + config_len;
  const auto total = get_le(p, 8);
  p += 8;
  if (bytes.size() != 12 + config_len + 8 + total * 8) throw CorruptionError("checkpoint parameter block is truncated");

  BranchModel model = init_model(config, 0).target;
  std::uint64_t expected = 0;
  for (const auto* q : model.parameters()) expected += q->value.size();
  if (expected != total)
    throw CorruptionError("checkpoint holds " + std::to_string(total) + " values but the architecture needs " +
                          std::to_string(expected));
  for (auto* q : model.parameters())
    for (auto& v : q->value) {
      v = std::bit_cast<double>(get_le(p, 8));
      p += 8;
    }
  return model;
}

}  // namespace pressure_id
