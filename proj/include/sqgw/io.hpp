#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sqgw/evolve.hpp"
#include "sqgw/grid.hpp"
#include "sqgw/profile.hpp"
#include "sqgw/solver.hpp"

namespace sqgw {

struct ProfileConfig {
  ProfileKind kind = ProfileKind::Bump;
  double a = 0.0;
  double b = 1.0;
  double amp = 1008.0;  // normalised so that f(b) = 1 unless set explicitly
  Profile build() const;
};

struct Config {
  GridSpec grid;
  WaveParams wave;
  ProfileConfig profile;
  SolveOptions solver;
  SeedParams init;
  EvolveOptions evolve;
  double evolve_speed_tol = 0.02;
  double evolve_shape_tol = 5e-2;
  std::string output_dir = "out";
  std::uint64_t seed = 1;
};

// Flat "key = value" lines with dotted sections, '#' comments and blank lines.
// Unknown keys, duplicates, malformed numbers and violated preconditions
// throw Config errors of the form "<source>:<line>: message".
Config parse_config(const std::string& text, const std::string& source = "<config>");
Config load_config(const std::filesystem::path& path);
// Canonical text form; parse_config(format_config(c)) reproduces c.
std::string format_config(const Config& c);

// Field file: "SQGF", u32 version, u32 nr, u32 nz, f64 Lr, f64 Lz, then
// nr * nz f64 samples (row-major, r slow) and an optional f64 time tag.
// All little-endian.
inline constexpr std::uint32_t kFieldFormatVersion = 1;
inline constexpr std::size_t kFieldHeaderBytes = 32;

struct FieldData {
  ScalarField field;
  std::optional<double> time;
};

std::vector<unsigned char> encode_field(const ScalarField& f, std::optional<double> time = {});
// Throws BadMagic, DimensionOverflow (dims zero or too large for the address
// space) or TruncatedPayload (byte count disagrees with the header).
FieldData decode_field(const std::vector<unsigned char>& bytes);

void export_field(const ScalarField& f, const std::filesystem::path& path,
                  std::optional<double> time = {});
FieldData import_field(const std::filesystem::path& path);
// "r,z,value" rows with 17 significant digits.
void export_field_csv(const ScalarField& f, const std::filesystem::path& path);

// Binary PGM, r along x (left = negative r), z along y (top = positive z).
// Linear map [-M, M] -> [0, 255] with M = max|v|; zero maps to 128.
std::vector<unsigned char> heatmap_pixels(const ScalarField& f);
void render_heatmap(const ScalarField& f, const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace sqgw
