#pragma once

#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "incalib/camera.hpp"
#include "incalib/errors.hpp"
#include "incalib/incidence.hpp"
#include "incalib/ransac.hpp"
#include "incalib/raster.hpp"
#include "incalib/synth.hpp"

namespace incalib {

// ============================================================================
// Raster file format for incidence fields and depth maps.
//
//   bytes 0..7   magic "INCFLD01"
//   byte  8      dtype code, u8 (1 = float32)
//   byte  9      channel count, u8 (3 = field, 1 = depth)
//   bytes 10..13 height, u32 little-endian
//   bytes 14..17 width,  u32 little-endian
//   bytes 18..   payload: row-major, channel-interleaved scalars,
//                little-endian; length = height*width*channels*4
//
// Storage is single-precision; in-memory values are double. Errors carry the
// byte offset of the first offending byte.
// ============================================================================

inline constexpr char kRasterMagic[8] = {'I', 'N', 'C', 'F', 'L', 'D', '0', '1'};
inline constexpr std::uint8_t kRasterDtypeF32 = 1;
inline constexpr std::size_t kRasterHeaderSize = 18;

struct RasterData {
  std::uint8_t dtype = kRasterDtypeF32;
  std::uint8_t channels = 0;
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::vector<float> payload;  // height*width*channels scalars
};

namespace detail {

inline void put_u32_le(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

inline std::uint32_t get_u32_le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

// float <-> little-endian bytes. The build targets little-endian hosts; the
// explicit byte shuffle keeps the file contract independent of that.
inline void put_f32_le(std::string& out, float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, 4);
  put_u32_le(out, bits);
}

inline float get_f32_le(const unsigned char* p) {
  const std::uint32_t bits = get_u32_le(p);
  float f;
  std::memcpy(&f, &bits, 4);
  return f;
}

}  // namespace detail

inline std::string serialize_raster(const RasterData& raster) {
  const std::size_t count = static_cast<std::size_t>(raster.height) * raster.width * raster.channels;
  if (raster.payload.size() != count)
    throw std::invalid_argument("serialize_raster: payload length does not match dims");
  if (raster.height == 0 || raster.width == 0 || raster.channels == 0)
    throw std::invalid_argument("serialize_raster: zero-sized raster");
  std::string out;
  out.reserve(kRasterHeaderSize + 4 * count);
  out.append(kRasterMagic, sizeof(kRasterMagic));
  out.push_back(static_cast<char>(raster.dtype));
  out.push_back(static_cast<char>(raster.channels));
  detail::put_u32_le(out, raster.height);
  detail::put_u32_le(out, raster.width);
  for (float f : raster.payload) detail::put_f32_le(out, f);
  return out;
}

inline RasterData parse_raster(const std::string& bytes) {
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (bytes.size() < kRasterHeaderSize) {
    // The header stops short; the first missing byte is the offender.
    throw FormatError("raster header truncated", bytes.size());
  }
  if (std::memcmp(bytes.data(), kRasterMagic, sizeof(kRasterMagic)) != 0)
    throw FormatError("bad raster magic", 0);
  RasterData raster;
  raster.dtype = p[8];
  if (raster.dtype != kRasterDtypeF32)
    throw FormatError("unsupported raster dtype code " + std::to_string(raster.dtype), 8);
  raster.channels = p[9];
  if (raster.channels != 1 && raster.channels != 3)
    throw FormatError("unsupported raster channel count " + std::to_string(raster.channels), 9);
  raster.height = detail::get_u32_le(p + 10);
  raster.width = detail::get_u32_le(p + 14);
  if (raster.height == 0) throw FormatError("raster height is zero", 10);
  if (raster.width == 0) throw FormatError("raster width is zero", 14);
  const std::size_t count =
      static_cast<std::size_t>(raster.height) * raster.width * raster.channels;
  const std::size_t expected = kRasterHeaderSize + 4 * count;
  if (bytes.size() < expected) throw FormatError("raster payload truncated", bytes.size());
  if (bytes.size() > expected) throw FormatError("trailing bytes after raster payload", expected);
  raster.payload.resize(count);
  for (std::size_t i = 0; i < count; ++i)
    raster.payload[i] = detail::get_f32_le(p + kRasterHeaderSize + 4 * i);
  return raster;
}

inline void write_raster(const std::string& path, const RasterData& raster) {
  const std::string bytes = serialize_raster(raster);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline RasterData read_raster(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_raster(bytes);
}

// --- conversions between rasters and in-memory types ------------------------

inline RasterData raster_from_field(const IncidenceField& field) {
  if (field.state != RayNormalization::z_one)
    throw std::invalid_argument("raster_from_field: field must be z_one normalized");
  RasterData raster;
  raster.channels = 3;
  raster.height = static_cast<std::uint32_t>(field.height);
  raster.width = static_cast<std::uint32_t>(field.width);
  raster.payload.reserve(field.size() * 3);
  for (const auto& v : field.rays) {
    raster.payload.push_back(static_cast<float>(v.x()));
    raster.payload.push_back(static_cast<float>(v.y()));
    raster.payload.push_back(static_cast<float>(v.z()));
  }
  return raster;
}

// Fields read from disk are re-normalized so downstream consumers always see
// an exact z_one field regardless of how the producer rounded its rays.
inline IncidenceField field_from_raster(const RasterData& raster) {
  if (raster.channels != 3)
    throw FormatError("expected a 3-channel field raster, got " +
                          std::to_string(raster.channels) + " channel(s)",
                      9);
  IncidenceField field(static_cast<int>(raster.width), static_cast<int>(raster.height),
                       RayNormalization::z_one);
  for (std::size_t i = 0; i < field.rays.size(); ++i)
    field.rays[i] = Eigen::Vector3d(raster.payload[3 * i], raster.payload[3 * i + 1],
                                    raster.payload[3 * i + 2]);
  return normalize_field(field, RayNormalization::z_one);
}

inline RasterData raster_from_depth(const DepthMap& depth) {
  RasterData raster;
  raster.channels = 1;
  raster.height = static_cast<std::uint32_t>(depth.height);
  raster.width = static_cast<std::uint32_t>(depth.width);
  raster.payload.reserve(depth.size());
  for (double d : depth.data) raster.payload.push_back(static_cast<float>(d));
  return raster;
}

inline DepthMap depth_from_raster(const RasterData& raster) {
  if (raster.channels != 1)
    throw FormatError("expected a 1-channel depth raster, got " +
                          std::to_string(raster.channels) + " channel(s)",
                      9);
  DepthMap depth(static_cast<int>(raster.width), static_cast<int>(raster.height));
  for (std::size_t i = 0; i < depth.data.size(); ++i) depth.data[i] = raster.payload[i];
  return depth;
}

// --- run configuration -------------------------------------------------------

// Parameters a command run is a pure function of. Serialized as JSON with
// sorted keys so the hash of a config is stable across runs and platforms.
struct RunConfig {
  std::string mode = "4dof";  // "4dof" | "simple"
  RansacConfig ransac;
  NoiseModel noise;
  std::uint64_t seed = 0;

  bool operator==(const RunConfig&) const = default;
};

inline void to_json(nlohmann::json& j, const RansacConfig& cfg) {
  j = nlohmann::json{{"iterations", cfg.iterations},
                     {"candidates_per_iteration", cfg.candidates_per_iteration},
                     {"scoring_samples", cfg.scoring_samples},
                     {"threshold_x", cfg.threshold_x},
                     {"threshold_y", cfg.threshold_y},
                     {"f_min", cfg.f_min},
                     {"f_max", cfg.f_max},
                     {"focal_steps", cfg.focal_steps},
                     {"seed", cfg.seed}};
}

inline void from_json(const nlohmann::json& j, RansacConfig& cfg) {
  j.at("iterations").get_to(cfg.iterations);
  j.at("candidates_per_iteration").get_to(cfg.candidates_per_iteration);
  j.at("scoring_samples").get_to(cfg.scoring_samples);
  j.at("threshold_x").get_to(cfg.threshold_x);
  j.at("threshold_y").get_to(cfg.threshold_y);
  j.at("f_min").get_to(cfg.f_min);
  j.at("f_max").get_to(cfg.f_max);
  j.at("focal_steps").get_to(cfg.focal_steps);
  j.at("seed").get_to(cfg.seed);
}

inline void to_json(nlohmann::json& j, const NoiseModel& noise) {
  j = nlohmann::json{{"outlier_fraction", noise.outlier_fraction},
                     {"angular_sigma_deg", noise.angular_sigma_deg},
                     {"seed", noise.seed}};
}

inline void from_json(const nlohmann::json& j, NoiseModel& noise) {
  j.at("outlier_fraction").get_to(noise.outlier_fraction);
  j.at("angular_sigma_deg").get_to(noise.angular_sigma_deg);
  j.at("seed").get_to(noise.seed);
}

inline void to_json(nlohmann::json& j, const RunConfig& cfg) {
  j = nlohmann::json{
      {"mode", cfg.mode}, {"ransac", cfg.ransac}, {"noise", cfg.noise}, {"seed", cfg.seed}};
}

inline void from_json(const nlohmann::json& j, RunConfig& cfg) {
  j.at("mode").get_to(cfg.mode);
  j.at("ransac").get_to(cfg.ransac);
  j.at("noise").get_to(cfg.noise);
  j.at("seed").get_to(cfg.seed);
}

}  // namespace incalib

// Intrinsics and CropResizeTransform validate in their constructors and have
// no default state, so their JSON conversions go through explicit serializer
// specializations instead of the default-construct-then-fill path.
namespace nlohmann {

template <>
struct adl_serializer<incalib::Intrinsics> {
  static void to_json(json& j, const incalib::Intrinsics& K) {
    j = json{{"fx", K.fx}, {"fy", K.fy}, {"bx", K.bx}, {"by", K.by}};
  }
  static incalib::Intrinsics from_json(const json& j) {
    return {j.at("fx").get<double>(), j.at("fy").get<double>(), j.at("bx").get<double>(),
            j.at("by").get<double>()};
  }
};

template <>
struct adl_serializer<incalib::CropResizeTransform> {
  static void to_json(json& j, const incalib::CropResizeTransform& T) {
    j = json{{"dfx", T.dfx}, {"dfy", T.dfy}, {"dcx", T.dcx}, {"dcy", T.dcy}};
  }
  static incalib::CropResizeTransform from_json(const json& j) {
    return {j.at("dfx").get<double>(), j.at("dfy").get<double>(), j.at("dcx").get<double>(),
            j.at("dcy").get<double>()};
  }
};

}  // namespace nlohmann

namespace incalib {

// FNV-1a over the sorted-key JSON dump: a stable fingerprint for embedding in
// output records.
inline std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string config_hash(const RunConfig& cfg) {
  const nlohmann::json j = cfg;
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(j.dump())));
  return std::string(buf);
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  nlohmann::json j;
  in >> j;
  return j.get<RunConfig>();
}

inline void save_run_config(const std::string& path, const RunConfig& cfg) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  const nlohmann::json j = cfg;
  out << j.dump(2) << '\n';
}

}  // namespace incalib
