#pragma once

// Binary model files.
//
//   offset  size        content
//   0       13          ASCII magic "SETFIT-DESK/1"
//   13      8           manifest length M, uint64 little-endian
//   21      M           UTF-8 JSON manifest (dims, label names, config)
//   21+M    4*V*d       encoder table, float32 little-endian, row-major
//   ...     4*C*d       head weights, float32 LE, row-major
//   ...     4*C         head bias, float32 LE
//   end-4   4           CRC-32 (zlib polynomial) of all preceding bytes, LE
//
// See docs/model_format.md for the manifest fields.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>
#include <zlib.h>

#include "setfit/error.hpp"
#include "setfit/pipeline.hpp"
#include "setfit/serialize.hpp"

namespace setfit {

namespace detail {

inline constexpr std::string_view kMagicPrefix = "SETFIT-DESK/";

inline void put_u32(std::string& out, std::uint32_t x) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((x >> (8 * i)) & 0xFF));
}

inline void put_u64(std::string& out, std::uint64_t x) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((x >> (8 * i)) & 0xFF));
}

inline std::uint32_t get_u32(std::string_view in, std::size_t at) {
  std::uint32_t x = 0;
  for (int i = 0; i < 4; ++i) x |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
  return x;
}

inline std::uint64_t get_u64(std::string_view in, std::size_t at) {
  std::uint64_t x = 0;
  for (int i = 0; i < 8; ++i) x |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
  return x;
}

inline void put_floats(std::string& out, std::span<const float> xs) {
  for (const float f : xs) put_u32(out, std::bit_cast<std::uint32_t>(f));
}

inline std::vector<float> get_floats(std::string_view in, std::size_t at, std::size_t count) {
  std::vector<float> xs(count);
  for (std::size_t i = 0; i < count; ++i) xs[i] = std::bit_cast<float>(get_u32(in, at + 4 * i));
  return xs;
}

inline std::uint32_t crc32_of(std::string_view bytes) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks
  constexpr std::size_t kChunk = 1u << 30;
  for (std::size_t off = 0; off < bytes.size(); off += kChunk) {
    const auto n = std::min(kChunk, bytes.size() - off);
    crc = ::crc32(crc, reinterpret_cast<const Bytef*>(bytes.data() + off), static_cast<uInt>(n));
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace detail

inline std::string serialize_model(const Model& model) {
  const auto& enc = model.encoder;
  const auto& head = model.head;
  nlohmann::json manifest = {
      {"format_version", kModelFormatVersion},
      {"encoder", {{"vocab_buckets", enc.vocab_buckets}, {"dim", enc.dim}, {"max_len", enc.max_len},
                   {"hash_seed", enc.hash_seed}}},
      {"head", {{"classes", head.class_count()}, {"dim", head.dim}}},
      {"label_names", model.label_names},
      {"config", model.config},
  };
  const std::string text = manifest.dump();

  std::string out;
  out.reserve(13 + 8 + text.size() + 4 * (enc.table.size() + head.weights.size() + head.bias.size()) + 4);
  out += kModelFormatVersion;
  detail::put_u64(out, text.size());
  out += text;
  detail::put_floats(out, enc.table);
  detail::put_floats(out, head.weights);
  detail::put_floats(out, head.bias);
  detail::put_u32(out, detail::crc32_of(out));
  return out;
}

inline Model deserialize_model(std::string_view bytes) {
  const auto prefix = detail::kMagicPrefix;
  const auto magic_len = kModelFormatVersion.size();
  const auto n_prefix = std::min(bytes.size(), prefix.size());
  if (bytes.substr(0, n_prefix) != prefix.substr(0, n_prefix)) throw Error(ErrorCode::BadFormat, "missing model magic");
  if (bytes.size() < magic_len) throw Error(ErrorCode::Truncated, "file ends inside the magic string");
  if (bytes.substr(0, magic_len) != kModelFormatVersion) {
    throw Error(ErrorCode::UnsupportedVersion, "model version '" + std::string(bytes.substr(0, magic_len)) +
                                                   "', expected '" + std::string(kModelFormatVersion) + "'");
  }
  if (bytes.size() < magic_len + 8) throw Error(ErrorCode::Truncated, "file ends before the manifest length");
  const auto manifest_len = detail::get_u64(bytes, magic_len);
  const std::size_t arrays_at = magic_len + 8 + manifest_len;
  if (manifest_len > bytes.size() || bytes.size() < arrays_at) throw Error(ErrorCode::Truncated, "file ends inside the manifest");

  const auto checksum_ok = [&] {
    return bytes.size() >= 4 &&
           detail::crc32_of(bytes.substr(0, bytes.size() - 4)) == detail::get_u32(bytes, bytes.size() - 4);
  };

  nlohmann::json manifest;
  std::size_t V = 0, d = 0, C = 0, head_dim = 0;
  Model model;
  try {
    manifest = nlohmann::json::parse(bytes.substr(magic_len + 8, manifest_len));
    if (manifest.at("format_version").get<std::string>() != kModelFormatVersion) {
      throw Error(ErrorCode::UnsupportedVersion, "manifest version mismatch");
    }
    const auto& e = manifest.at("encoder");
    V = e.at("vocab_buckets").get<std::size_t>();
    d = e.at("dim").get<std::size_t>();
    model.encoder.vocab_buckets = V;
    model.encoder.dim = d;
    model.encoder.max_len = e.at("max_len").get<std::size_t>();
    model.encoder.hash_seed = e.at("hash_seed").get<std::uint64_t>();
    C = manifest.at("head").at("classes").get<std::size_t>();
    head_dim = manifest.at("head").at("dim").get<std::size_t>();
    model.label_names = manifest.at("label_names").get<std::vector<std::string>>();
    model.config = manifest.at("config").get<FitConfig>();
  } catch (const nlohmann::json::exception& ex) {
    if (!checksum_ok()) throw Error(ErrorCode::ChecksumMismatch, "CRC-32 does not match contents");
    throw Error(ErrorCode::BadFormat, std::string("invalid manifest: ") + ex.what());
  }
  if (head_dim != d || model.label_names.size() != C) {
    throw Error(ErrorCode::BadFormat, "manifest dimensions are inconsistent");
  }

  const std::size_t floats = V * d + C * d + C;
  const std::size_t expected = arrays_at + 4 * floats + 4;
  if (bytes.size() < expected) throw Error(ErrorCode::Truncated, "expected " + std::to_string(expected) + " bytes, got " +
                                                                     std::to_string(bytes.size()));
  if (bytes.size() > expected) throw Error(ErrorCode::BadFormat, "trailing bytes after checksum");
  if (!checksum_ok()) throw Error(ErrorCode::ChecksumMismatch, "CRC-32 does not match contents");

  model.encoder.table = detail::get_floats(bytes, arrays_at, V * d);
  model.head.dim = d;
  model.head.weights = detail::get_floats(bytes, arrays_at + 4 * V * d, C * d);
  model.head.bias = detail::get_floats(bytes, arrays_at + 4 * (V * d + C * d), C);
  model.head.label_names = model.label_names;
  model.format_version = std::string(kModelFormatVersion);
  return model;
}

inline void save_model(const Model& model, const std::filesystem::path& path) {
  const auto bytes = serialize_model(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::FileNotFound, "cannot write '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

inline Model load_model(const std::filesystem::path& path) {
  return deserialize_model(detail::read_file(path));
}

}  // namespace setfit
