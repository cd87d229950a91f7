#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <map>
#include <string>
#include <vector>

#include "lfd/grid.hpp"
#include "lfd/nn/adam.hpp"
#include "lfd/nn/model.hpp"

namespace lfd::nn {

// Weight file format "LFDW", version 1:
//   magic "LFDW" | u16 version | u32 tensor count
//   per tensor: u16 name length | name | u8 rank | rank x u32 dims | payload
// Payloads are f32 LE. Adam moments are stored as "<param>.m" / "<param>.v";
// the step counter is a u64 LE stored under "adam.t" (dims [2], 8 bytes).
namespace weights_detail {

struct Record {
  std::vector<uint32_t> dims;
  std::string payload;
};

inline void put_record(std::string& out, const std::string& name,
                       const std::vector<uint32_t>& dims, const void* data,
                       size_t bytes) {
  lfd::detail::put_u16le(out, static_cast<uint16_t>(name.size()));
  out += name;
  out.push_back(static_cast<char>(dims.size()));
  for (uint32_t d : dims) lfd::detail::put_u32le(out, d);
  out.append(reinterpret_cast<const char*>(data), bytes);
}

inline std::map<std::string, Record> parse(const std::string& bytes, const std::string& path) {
  if (bytes.size() < 10) throw format_error("weights: truncated header in " + path);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (std::memcmp(p, "LFDW", 4) != 0) throw format_error("weights: bad magic in " + path);
  if (lfd::detail::get_u16le(p + 4) != 1) throw format_error("weights: unsupported version in " + path);
  const uint32_t count = lfd::detail::get_u32le(p + 6);
  size_t off = 10;
  std::map<std::string, Record> records;
  for (uint32_t i = 0; i < count; ++i) {
    if (off + 2 > bytes.size()) throw format_error("weights: truncated record in " + path);
    const uint16_t name_len = lfd::detail::get_u16le(p + off);
    off += 2;
    if (off + name_len + 1 > bytes.size()) throw format_error("weights: truncated name in " + path);
    std::string name = bytes.substr(off, name_len);
    off += name_len;
    const uint8_t rank = p[off++];
    if (off + rank * 4ull > bytes.size()) throw format_error("weights: truncated dims in " + path);
    Record rec;
    size_t elems = 1;
    for (int d = 0; d < rank; ++d) {
      rec.dims.push_back(lfd::detail::get_u32le(p + off));
      off += 4;
      elems *= rec.dims.back();
    }
    const size_t payload = elems * 4;
    if (off + payload > bytes.size())
      throw format_error("weights: truncated payload for '" + name + "' in " + path);
    rec.payload = bytes.substr(off, payload);
    off += payload;
    records.emplace(std::move(name), std::move(rec));
  }
  return records;
}

}  // namespace weights_detail

inline void save_weights(Model& model, const AdamState* adam, const std::string& path) {
  using namespace weights_detail;
  std::string out = "LFDW";
  auto params = model.params();
  uint32_t count = static_cast<uint32_t>(params.size());
  if (adam != nullptr && !adam->m.empty())
    count += static_cast<uint32_t>(2 * params.size()) + 1;
  lfd::detail::put_u16le(out, 1);
  lfd::detail::put_u32le(out, count);
  for (auto& p : params)
    put_record(out, p.name, p.shape, p.data, p.size * 4);
  if (adam != nullptr && !adam->m.empty()) {
    for (size_t i = 0; i < params.size(); ++i) {
      put_record(out, params[i].name + ".m", params[i].shape, adam->m[i].data(), params[i].size * 4);
      put_record(out, params[i].name + ".v", params[i].shape, adam->v[i].data(), params[i].size * 4);
    }
    char step[8];
    for (int i = 0; i < 8; ++i) step[i] = static_cast<char>((adam->t >> (8 * i)) & 0xff);
    put_record(out, "adam.t", {2}, step, 8);
  }
  lfd::detail::write_file(path, out);
}

// Loads weights (and Adam state when present) into an existing model.
// Shape disagreements name the offending layer.
inline void load_weights(Model& model, AdamState* adam, const std::string& path) {
  using namespace weights_detail;
  auto records = parse(lfd::detail::read_file(path), path);
  auto params = model.params();
  for (auto& p : params) {
    auto it = records.find(p.name);
    if (it == records.end())
      throw format_error("weights: missing tensor '" + p.name + "' in " + path);
    if (it->second.dims != p.shape) {
      std::string msg = "weights: shape mismatch for '" + p.name + "' in " + path + " (file";
      for (uint32_t d : it->second.dims) msg += " " + std::to_string(d);
      msg += ", model";
      for (uint32_t d : p.shape) msg += " " + std::to_string(d);
      throw format_error(msg + ")");
    }
    std::memcpy(p.data, it->second.payload.data(), p.size * 4);
  }
  const bool has_adam = records.count("adam.t") > 0;
  if (adam != nullptr && has_adam) {
    adam->m.clear();
    adam->v.clear();
    adam->ensure(model);
    for (size_t i = 0; i < params.size(); ++i) {
      for (const char* suffix : {".m", ".v"}) {
        auto it = records.find(params[i].name + suffix);
        if (it == records.end())
          throw format_error("weights: missing Adam moment for '" + params[i].name + "' in " + path);
        if (it->second.payload.size() != params[i].size * 4)
          throw format_error("weights: bad moment size for '" + params[i].name + "' in " + path);
        auto& dst = suffix[1] == 'm' ? adam->m[i] : adam->v[i];
        std::memcpy(dst.data(), it->second.payload.data(), params[i].size * 4);
      }
    }
    const auto& step = records.at("adam.t").payload;
    if (step.size() != 8) throw format_error("weights: bad adam.t record in " + path);
    uint64_t t = 0;
    for (int i = 0; i < 8; ++i)
      t |= static_cast<uint64_t>(static_cast<unsigned char>(step[i])) << (8 * i);
    adam->t = t;
  } else if (adam != nullptr) {
    adam->m.clear();
    adam->v.clear();
    adam->t = 0;
  }
}

}  // namespace lfd::nn
