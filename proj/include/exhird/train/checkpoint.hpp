#pragma once

#include <nlohmann/json.hpp>

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "exhird/errors.hpp"
#include "exhird/model/model.hpp"

namespace exhird::train {

static_assert(std::endian::native == std::endian::little, "checkpoint format assumes a little-endian host");

inline nlohmann::json to_json(const model::ModelConfig& c) {
  return {{"vocab_size", c.vocab_size},     {"embed_dim", c.embed_dim},
          {"hidden_dim", c.hidden_dim},     {"encoder_layers", c.encoder_layers},
          {"decoder", model::to_string(c.decoder)}, {"share_embeddings", c.share_embeddings}};
}

inline model::ModelConfig model_config_from_json(const nlohmann::json& j) {
  model::ModelConfig c;
  try {
    c.vocab_size = j.at("vocab_size").get<std::size_t>();
    c.embed_dim = j.at("embed_dim").get<std::size_t>();
    c.hidden_dim = j.at("hidden_dim").get<std::size_t>();
    c.encoder_layers = j.at("encoder_layers").get<std::size_t>();
    c.decoder = model::parse_decoder_kind(j.at("decoder").get<std::string>());
    c.share_embeddings = j.at("share_embeddings").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint model config: ") + e.what());
  }
  return c;
}

// File layout (all integers little-endian):
//   "EXHIRDCK"  u32 version  u32 scalar_bytes
//   u64 metadata_length  metadata JSON (contains "model": ModelConfig)
//   u64 parameter_count
//   per parameter: u32 name_length, name, u32 rank, u64 dims[rank], row-major values
inline constexpr char kCheckpointMagic[8] = {'E', 'X', 'H', 'I', 'R', 'D', 'C', 'K'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

template <class I>
void put(std::ostream& out, I v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(I));
}

template <class I>
I get(std::istream& in, const std::string& path) {
  I v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(I))) throw DataError("truncated checkpoint " + path);
  return v;
}

}  // namespace detail

/// Writes the model; `metadata` is stored verbatim next to the model config.
template <class T>
void save_checkpoint(const std::string& path, const model::Model<T>& m, nlohmann::json metadata = nlohmann::json::object()) {
  metadata["model"] = to_json(m.config());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint " + path);
  out.write(kCheckpointMagic, sizeof kCheckpointMagic);
  detail::put<std::uint32_t>(out, kCheckpointVersion);
  detail::put<std::uint32_t>(out, sizeof(T));
  const std::string meta = metadata.dump();
  detail::put<std::uint64_t>(out, meta.size());
  out.write(meta.data(), static_cast<std::streamsize>(meta.size()));
  const auto& params = m.params();
  detail::put<std::uint64_t>(out, params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& p = params[i];
    detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(p.name.size()));
    out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(p.value.rank()));
    for (auto d : p.value.shape()) detail::put<std::uint64_t>(out, d);
    out.write(reinterpret_cast<const char*>(p.value.data()), static_cast<std::streamsize>(p.value.size() * sizeof(T)));
  }
  if (!out) throw DataError("failed writing checkpoint " + path);
}

template <class T>
struct LoadedCheckpoint {
  model::Model<T> model;
  nlohmann::json metadata;
};

/// Reads a checkpoint written by save_checkpoint with the same scalar type.
template <class T>
LoadedCheckpoint<T> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path);
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0)
    throw DataError(path + " is not a checkpoint");
  if (detail::get<std::uint32_t>(in, path) != kCheckpointVersion)
    throw DataError("unsupported checkpoint version in " + path);
  if (detail::get<std::uint32_t>(in, path) != sizeof(T))
    throw DataError("checkpoint " + path + " was written with a different scalar precision");
  const auto meta_len = detail::get<std::uint64_t>(in, path);
  std::string meta(meta_len, '\0');
  if (!in.read(meta.data(), static_cast<std::streamsize>(meta_len))) throw DataError("truncated checkpoint " + path);
  nlohmann::json metadata;
  try {
    metadata = nlohmann::json::parse(meta);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("checkpoint metadata: " + std::string(e.what()));
  }
  model::Model<T> m(model_config_from_json(metadata.at("model")));
  const auto count = detail::get<std::uint64_t>(in, path);
  if (count != m.params().size()) throw DataError("checkpoint " + path + " has an unexpected parameter count");
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto name_len = detail::get<std::uint32_t>(in, path);
    std::string name(name_len, '\0');
    if (!in.read(name.data(), name_len)) throw DataError("truncated checkpoint " + path);
    if (!m.params().contains(name)) throw DataError("checkpoint " + path + " has unknown parameter " + name);
    auto& p = m.params().at(name);
    const auto rank = detail::get<std::uint32_t>(in, path);
    nn::Shape shape;
    for (std::uint32_t r = 0; r < rank; ++r) shape.push_back(detail::get<std::uint64_t>(in, path));
    if (shape != p.value.shape())
      throw DataError("checkpoint parameter " + name + " has shape " + nn::to_string(shape) + ", expected " +
                      nn::to_string(p.value.shape()));
    if (!in.read(reinterpret_cast<char*>(p.value.data()), static_cast<std::streamsize>(p.value.size() * sizeof(T))))
      throw DataError("truncated checkpoint " + path);
  }
  return {std::move(m), std::move(metadata)};
}

}  // namespace exhird::train
