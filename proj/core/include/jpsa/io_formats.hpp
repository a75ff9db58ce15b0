#ifndef JPSA_IO_FORMATS_HPP
#define JPSA_IO_FORMATS_HPP

#include "jpsa/data_model.hpp"
#include "jpsa/projection_stack.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace jpsa::io {

enum class DType { f32le, f64le };

std::size_t dtype_size(DType t);

/// Text header describing a raw little-endian band-sequential payload.
/// Stored as a small JSON object with keys width, height, bands, dtype,
/// interleave and (optionally) scale.
struct CubeHeader {
  int width = 0;
  int height = 0;
  int bands = 0;
  DType dtype = DType::f32le;
  std::string interleave = "bsq";
  std::optional<double> scale;

  std::size_t payload_bytes() const;
};

CubeHeader parse_cube_header(std::string_view text);
std::string format_cube_header(const CubeHeader& header);

struct Cube {
  Matrix values;  // bands x (width*height), column = row*width + col
  int width = 0;
  int height = 0;

  std::size_t pixels() const { return static_cast<std::size_t>(width) * height; }
  FeatureMatrix features() const { return FeatureMatrix(values, FeatureKind::pixel); }
};

Cube decode_cube(const CubeHeader& header, std::string_view payload);
std::string encode_cube_payload(const Matrix& values, DType dtype);

Cube load_cube(const std::filesystem::path& header_path, const std::filesystem::path& payload_path);
void save_cube(const std::filesystem::path& header_path, const std::filesystem::path& payload_path,
               const Matrix& values, int width, int height, DType dtype = DType::f64le);

// Labels: one integer per line, 0 = unlabeled, 1..L = class.
std::vector<int> parse_labels(std::string_view text, std::size_t n_pixels,
                              std::optional<int> max_class = std::nullopt);
std::string format_labels(std::span<const int> labels);
std::vector<int> load_labels(const std::filesystem::path& path, std::size_t n_pixels,
                             std::optional<int> max_class = std::nullopt);
void save_labels(const std::filesystem::path& path, std::span<const int> labels);

using Rgb = std::array<std::uint8_t, 3>;

/// Class id -> color. Id 0 (unlabeled) always renders black.
class ClassPalette {
 public:
  ClassPalette() = default;
  explicit ClassPalette(std::map<int, Rgb> colors);

  // Deterministic palette with distinct colors for classes 1..n.
  static ClassPalette standard(int n_classes);

  std::optional<Rgb> lookup(int class_id) const;
  const std::map<int, Rgb>& colors() const { return colors_; }

 private:
  std::map<int, Rgb> colors_;
};

std::string render_class_map(std::span<const int> predictions, int width, int height,
                             const ClassPalette& palette);

struct PpmImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;
};

PpmImage parse_ppm(std::string_view bytes);

// Binary model stream with a version tag.
inline constexpr std::uint32_t kModelVersion = 1;

std::string save_model(const ProjectionStack& stack);
ProjectionStack load_model(std::string_view bytes);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

// Shortest round-trippable decimal form of a double.
std::string format_real(double v);

}  // namespace jpsa::io

#endif  // JPSA_IO_FORMATS_HPP
