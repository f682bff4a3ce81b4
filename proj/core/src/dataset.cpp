#include "pressure_id/dataset.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include "json.hpp"

#include "pressure_id/errors.hpp"

namespace pressure_id {
namespace {

constexpr std::array<char, 4> kMagic{'P', 'R', 'S', 'D'};
constexpr std::size_t kHeaderBytes = 4 + 4 * 4;
constexpr std::size_t kRecordBytes = 2 + 2 + 1 + 3 + kFrameCells * 4;

void put_u16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xFF));
  out.push_back(static_cast<unsigned char>(v >> 8));
}

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) out.push_back(static_cast<unsigned char>(v >> shift));
}

std::uint16_t get_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::vector<unsigned char> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed for '" + path.string() + "'");
  return bytes;
}

void write_all(const std::filesystem::path& path, const void* data, std::size_t size) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace

DataView DataView::all(const Dataset& dataset) {
  DataView v;
  v.dataset = &dataset;
  v.indices.resize(dataset.records.size());
  for (std::size_t i = 0; i < v.indices.size(); ++i) v.indices[i] = i;
  return v;
}

DataView DataView::of(const Dataset& dataset, std::vector<std::size_t> indices) {
  for (auto i : indices) require(i < dataset.records.size(), "data view index out of range");
  return DataView{&dataset, std::move(indices)};
}

std::vector<const PressureFrame*> DataView::frames() const {
  std::vector<const PressureFrame*> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(&dataset->records[i].frame);
  return out;
}

std::vector<int> DataView::labels() const {
  std::vector<int> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(dataset->records[i].subject_id);
  return out;
}

void validate_dataset(std::span<const SampleRecord> records, const DatasetManifest& manifest) {
  require(manifest.frame_rows == kFrameRows && manifest.frame_cols == kFrameCols,
          "manifest frame shape must be 56x40");
  require(manifest.subject_count >= 0 && manifest.posture_count >= 0 &&
              manifest.samples_per_subject_posture >= 0,
          "manifest counts must be non-negative");
  require(manifest.subject_count <= 0xFFFF && manifest.posture_count <= 0xFFFF,
          "subject/posture counts must fit in 16 bits");
  require(records.size() == manifest.expected_record_count(),
          "manifest declares " + std::to_string(manifest.expected_record_count()) +
              " records but " + std::to_string(records.size()) + " were supplied");
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    require(r.subject_id >= 0 && r.subject_id < manifest.subject_count,
            "record " + std::to_string(i) + " has subject_id out of range");
    require(r.posture_id >= 0 && r.posture_id < manifest.posture_count,
            "record " + std::to_string(i) + " has posture_id out of range");
    require(r.frame.values().size() == kFrameCells, "record " + std::to_string(i) + " frame is not 56x40");
  }
}

std::filesystem::path manifest_path_for(const std::filesystem::path& dataset_path) {
  auto p = dataset_path;
  p.replace_extension(".json");
  return p;
}

std::string manifest_to_json(const DatasetManifest& m) {
  nlohmann::ordered_json j;
  j["name"] = m.name;
  j["subject_count"] = m.subject_count;
  j["posture_count"] = m.posture_count;
  j["samples_per_subject_posture"] = m.samples_per_subject_posture;
  j["frame_rows"] = m.frame_rows;
  j["frame_cols"] = m.frame_cols;
  j["generator_seed"] = m.generator_seed ? nlohmann::ordered_json(*m.generator_seed) : nlohmann::ordered_json(nullptr);
  j["format_version"] = m.format_version;
  return j.dump(2) + "\n";
}

DatasetManifest manifest_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed dataset manifest: ") + e.what());
  }
  DatasetManifest m;
  try {
    m.name = j.value("name", std::string{});
    m.subject_count = j.at("subject_count").get<int>();
    m.posture_count = j.at("posture_count").get<int>();
    m.samples_per_subject_posture = j.at("samples_per_subject_posture").get<int>();
    m.frame_rows = j.value("frame_rows", kFrameRows);
    m.frame_cols = j.value("frame_cols", kFrameCols);
    if (j.contains("generator_seed") && !j["generator_seed"].is_null())
      m.generator_seed = j["generator_seed"].get<std::uint64_t>();
    m.format_version = j.value("format_version", kDatasetFormatVersion);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("dataset manifest is missing fields: ") + e.what());
  }
  return m;
}

void save_dataset(std::span<const SampleRecord> records, const DatasetManifest& manifest,
                  const std::filesystem::path& path) {
  validate_dataset(records, manifest);

  std::vector<unsigned char> bytes;
  bytes.reserve(kHeaderBytes + records.size() * kRecordBytes);
  bytes.insert(bytes.end(), kMagic.begin(), kMagic.end());
  put_u32(bytes, kDatasetFormatVersion);
  put_u32(bytes, static_cast<std::uint32_t>(records.size()));
  put_u32(bytes, kFrameRows);
  put_u32(bytes, kFrameCols);
  for (const auto& r : records) {
    put_u16(bytes, static_cast<std::uint16_t>(r.subject_id));
    put_u16(bytes, static_cast<std::uint16_t>(r.posture_id));
    bytes.push_back(static_cast<unsigned char>(r.device));
    bytes.insert(bytes.end(), 3, 0);
    for (float v : r.frame.values()) put_u32(bytes, std::bit_cast<std::uint32_t>(v));
  }
  write_all(path, bytes.data(), bytes.size());

  DatasetManifest written = manifest;
  written.format_version = kDatasetFormatVersion;
  const auto text = manifest_to_json(written);
  write_all(manifest_path_for(path), text.data(), text.size());
}

Dataset load_dataset(const std::filesystem::path& path) {
  const auto bytes = read_all(path);
  if (bytes.size() < kMagic.size() || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin()))
    throw FormatError("'" + path.string() + "' is not a PRSD dataset (bad magic)");
  if (bytes.size() < kHeaderBytes) throw CorruptionError("'" + path.string() + "' has a truncated header");

  const auto version = get_u32(bytes.data() + 4);
  if (version != kDatasetFormatVersion)
    throw FormatError("unsupported PRSD format version " + std::to_string(version));
  const auto count = get_u32(bytes.data() + 8);
  const auto rows = get_u32(bytes.data() + 12);
  const auto cols = get_u32(bytes.data() + 16);
  if (rows != static_cast<std::uint32_t>(kFrameRows) || cols != static_cast<std::uint32_t>(kFrameCols))
    throw FormatError("PRSD frame shape " + std::to_string(rows) + "x" + std::to_string(cols) +
                      " is not 56x40");
  const std::size_t expected = kHeaderBytes + static_cast<std::size_t>(count) * kRecordBytes;
  if (bytes.size() < expected)
    throw CorruptionError("'" + path.string() + "' is truncated: expected " + std::to_string(expected) +
                          " bytes, found " + std::to_string(bytes.size()));
  if (bytes.size() > expected)
    throw CorruptionError("'" + path.string() + "' has " + std::to_string(bytes.size() - expected) +
                          " trailing bytes");

  Dataset ds;
  ds.records.reserve(count);
  const unsigned char* p = bytes.data() + kHeaderBytes;
  for (std::uint32_t i = 0; i < count; ++i, p += kRecordBytes) {
    SampleRecord r;
    r.subject_id = get_u16(p);
    r.posture_id = get_u16(p + 2);
    if (p[4] > 1) throw CorruptionError("record " + std::to_string(i) + " has invalid device tag");
    r.device = static_cast<Device>(p[4]);
    std::vector<float> values(kFrameCells);
    const unsigned char* f = p + 8;
    for (std::size_t c = 0; c < kFrameCells; ++c, f += 4) values[c] = std::bit_cast<float>(get_u32(f));
    try {
      r.frame = PressureFrame(std::move(values));
    } catch (const ValidationError& e) {
      throw CorruptionError("record " + std::to_string(i) + ": " + e.what());
    }
    ds.records.push_back(std::move(r));
  }

  const auto sidecar = manifest_path_for(path);
  if (std::filesystem::exists(sidecar)) {
    const auto text = read_all(sidecar);
    ds.manifest = manifest_from_json(std::string_view(reinterpret_cast<const char*>(text.data()), text.size()));
  } else {
    DatasetManifest& m = ds.manifest;
    m.name = path.stem().string();
    for (const auto& r : ds.records) {
      m.subject_count = std::max(m.subject_count, r.subject_id + 1);
      m.posture_count = std::max(m.posture_count, r.posture_id + 1);
    }
    const std::size_t groups = static_cast<std::size_t>(m.subject_count) * m.posture_count;
    m.samples_per_subject_posture = groups == 0 ? 0 : static_cast<int>(ds.records.size() / groups);
  }
  try {
    validate_dataset(ds.records, ds.manifest);
  } catch (const ValidationError& e) {
    throw CorruptionError("'" + path.string() + "' disagrees with its manifest: " + e.what());
  }
  return ds;
}

}  // namespace pressure_id
