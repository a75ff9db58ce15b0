#include "jpsa/io_formats.hpp"

#include <json.hpp>

#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

namespace jpsa::io {

namespace {

template <typename U>
void put_le(std::string& out, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
}

template <typename U>
U get_le(std::string_view in, std::size_t offset) {
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    v |= static_cast<U>(static_cast<unsigned char>(in[offset + i])) << (8 * i);
  }
  return v;
}

// Bounds-checked little-endian reader for the model stream.
class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename U>
  U take() {
    need(sizeof(U));
    U v = get_le<U>(bytes_, pos_);
    pos_ += sizeof(U);
    return v;
  }

  std::string_view take_bytes(std::size_t n) {
    need(n);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw FormatError("model stream truncated at byte " + std::to_string(pos_));
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

void put_matrix(std::string& out, const Matrix& m) {
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(m.rows()));
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(m.cols()));
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) put_le(out, std::bit_cast<std::uint64_t>(m(i, j)));
  }
}

Matrix take_matrix(Reader& r) {
  const auto rows = r.take<std::uint64_t>();
  const auto cols = r.take<std::uint64_t>();
  if (rows > (1u << 24) || cols > (1u << 24)) throw FormatError("model stream: implausible matrix shape");
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = std::bit_cast<double>(r.take<std::uint64_t>());
  }
  return m;
}

constexpr std::string_view kModelMagic = "JPSAMODL";

}  // namespace

std::size_t dtype_size(DType t) { return t == DType::f32le ? 4 : 8; }

std::size_t CubeHeader::payload_bytes() const {
  return static_cast<std::size_t>(width) * height * bands * dtype_size(dtype);
}

CubeHeader parse_cube_header(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("cube header: ") + e.what());
  }
  CubeHeader h;
  try {
    h.width = j.at("width").get<int>();
    h.height = j.at("height").get<int>();
    h.bands = j.at("bands").get<int>();
    const auto dtype = j.at("dtype").get<std::string>();
    if (dtype == "f32le") {
      h.dtype = DType::f32le;
    } else if (dtype == "f64le") {
      h.dtype = DType::f64le;
    } else {
      throw FormatError("cube header: unknown dtype '" + dtype + "'");
    }
    h.interleave = j.value("interleave", std::string("bsq"));
    if (j.contains("scale") && !j.at("scale").is_null()) h.scale = j.at("scale").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("cube header: ") + e.what());
  }
  if (h.interleave != "bsq") throw FormatError("cube header: unsupported interleave '" + h.interleave + "'");
  if (h.width < 1 || h.height < 1 || h.bands < 1) throw FormatError("cube header: dimensions must be positive");
  if (h.scale && !(*h.scale != 0 && std::isfinite(*h.scale))) {
    throw FormatError("cube header: scale must be finite and nonzero");
  }
  return h;
}

std::string format_cube_header(const CubeHeader& header) {
  nlohmann::ordered_json j;
  j["width"] = header.width;
  j["height"] = header.height;
  j["bands"] = header.bands;
  j["dtype"] = header.dtype == DType::f32le ? "f32le" : "f64le";
  j["interleave"] = header.interleave;
  if (header.scale) j["scale"] = *header.scale;
  return j.dump(2) + "\n";
}

Cube decode_cube(const CubeHeader& header, std::string_view payload) {
  const std::size_t expected = header.payload_bytes();
  if (payload.size() != expected) {
    throw FormatError("cube payload length mismatch: expected " + std::to_string(expected) +
                      " bytes, got " + std::to_string(payload.size()));
  }
  Cube cube;
  cube.width = header.width;
  cube.height = header.height;
  const Eigen::Index n = static_cast<Eigen::Index>(header.width) * header.height;
  cube.values.resize(header.bands, n);
  const std::size_t w = dtype_size(header.dtype);
  std::size_t off = 0;
  for (int b = 0; b < header.bands; ++b) {
    for (Eigen::Index px = 0; px < n; ++px, off += w) {
      double v = header.dtype == DType::f32le
                     ? static_cast<double>(std::bit_cast<float>(get_le<std::uint32_t>(payload, off)))
                     : std::bit_cast<double>(get_le<std::uint64_t>(payload, off));
      if (header.scale) v /= *header.scale;
      cube.values(b, px) = v;
    }
  }
  if (!cube.values.allFinite()) throw FormatError("cube payload contains non-finite values");
  return cube;
}

std::string encode_cube_payload(const Matrix& values, DType dtype) {
  std::string out;
  out.reserve(static_cast<std::size_t>(values.size()) * dtype_size(dtype));
  for (Eigen::Index b = 0; b < values.rows(); ++b) {
    for (Eigen::Index px = 0; px < values.cols(); ++px) {
      if (dtype == DType::f32le) {
        put_le(out, std::bit_cast<std::uint32_t>(static_cast<float>(values(b, px))));
      } else {
        put_le(out, std::bit_cast<std::uint64_t>(values(b, px)));
      }
    }
  }
  return out;
}

Cube load_cube(const std::filesystem::path& header_path, const std::filesystem::path& payload_path) {
  const auto header = parse_cube_header(read_file(header_path));
  return decode_cube(header, read_file(payload_path));
}

void save_cube(const std::filesystem::path& header_path, const std::filesystem::path& payload_path,
               const Matrix& values, int width, int height, DType dtype) {
  if (values.cols() != static_cast<Eigen::Index>(width) * height) {
    throw InputError("save_cube: column count does not equal width*height");
  }
  CubeHeader h;
  h.width = width;
  h.height = height;
  h.bands = static_cast<int>(values.rows());
  h.dtype = dtype;
  write_file(header_path, format_cube_header(h));
  write_file(payload_path, encode_cube_payload(values, dtype));
}

std::vector<int> parse_labels(std::string_view text, std::size_t n_pixels, std::optional<int> max_class) {
  std::vector<int> out;
  out.reserve(n_pixels);
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    int v = 0;
    auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
    if (ec != std::errc{} || ptr != line.data() + line.size()) {
      throw FormatError("labels: line " + std::to_string(line_no) + " is not an integer");
    }
    if (v < 0) throw FormatError("labels: negative label on line " + std::to_string(line_no));
    if (max_class && v > *max_class) {
      throw FormatError("labels: label " + std::to_string(v) + " on line " + std::to_string(line_no) +
                        " exceeds class count " + std::to_string(*max_class));
    }
    out.push_back(v);
  }
  if (out.size() != n_pixels) {
    throw FormatError("labels: expected " + std::to_string(n_pixels) + " values, got " + std::to_string(out.size()));
  }
  return out;
}

std::string format_labels(std::span<const int> labels) {
  std::string out;
  out.reserve(labels.size() * 3);
  for (int v : labels) {
    out += std::to_string(v);
    out += '\n';
  }
  return out;
}

std::vector<int> load_labels(const std::filesystem::path& path, std::size_t n_pixels, std::optional<int> max_class) {
  return parse_labels(read_file(path), n_pixels, max_class);
}

void save_labels(const std::filesystem::path& path, std::span<const int> labels) {
  write_file(path, format_labels(labels));
}

ClassPalette::ClassPalette(std::map<int, Rgb> colors) : colors_(std::move(colors)) {
  for (const auto& [id, rgb] : colors_) {
    if (id <= 0) throw InputError("palette: class ids must be >= 1 (0 is reserved for unlabeled)");
    for (const auto& [other, orgb] : colors_) {
      if (other != id && orgb == rgb) throw InputError("palette: classes " + std::to_string(id) + " and " +
                                                       std::to_string(other) + " share a color");
    }
    if (rgb == Rgb{0, 0, 0}) throw InputError("palette: black is reserved for unlabeled pixels");
  }
}

ClassPalette ClassPalette::standard(int n_classes) {
  static constexpr std::array<Rgb, 16> base{{{255, 0, 0},     {0, 255, 0},     {0, 0, 255},   {255, 255, 0},
                                             {0, 255, 255},   {255, 0, 255},   {192, 192, 192}, {128, 128, 128},
                                             {128, 0, 0},     {128, 128, 0},   {0, 128, 0},   {128, 0, 128},
                                             {0, 128, 128},   {0, 0, 128},     {255, 165, 0}, {255, 215, 180}}};
  std::map<int, Rgb> colors;
  std::set<Rgb> used;
  std::uint32_t state = 0x9E3779B9u;
  for (int c = 1; c <= n_classes; ++c) {
    Rgb rgb = c <= static_cast<int>(base.size()) ? base[c - 1] : Rgb{0, 0, 0};
    // Past the base table, draw from a fixed xorshift sequence until unused.
    while (rgb == Rgb{0, 0, 0} || used.count(rgb)) {
      state ^= state << 13;
      state ^= state >> 17;
      state ^= state << 5;
      rgb = {static_cast<std::uint8_t>(state), static_cast<std::uint8_t>(state >> 8),
             static_cast<std::uint8_t>(state >> 16)};
    }
    used.insert(rgb);
    colors[c] = rgb;
  }
  return ClassPalette(std::move(colors));
}

std::optional<Rgb> ClassPalette::lookup(int class_id) const {
  if (class_id == 0) return Rgb{0, 0, 0};
  auto it = colors_.find(class_id);
  if (it == colors_.end()) return std::nullopt;
  return it->second;
}

std::string render_class_map(std::span<const int> predictions, int width, int height, const ClassPalette& palette) {
  if (width < 1 || height < 1) throw InputError("render_class_map: dimensions must be positive");
  const std::size_t n = static_cast<std::size_t>(width) * height;
  if (predictions.size() != n) {
    throw InputError("render_class_map: expected " + std::to_string(n) + " predictions, got " +
                     std::to_string(predictions.size()));
  }
  std::string out = "P6\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  const std::size_t header = out.size();
  out.resize(header + 3 * n);
  for (std::size_t i = 0; i < n; ++i) {
    auto rgb = palette.lookup(predictions[i]);
    if (!rgb) {
      throw InputError("render_class_map: unknown class " + std::to_string(predictions[i]) + " at pixel " +
                       std::to_string(i));
    }
    std::memcpy(out.data() + header + 3 * i, rgb->data(), 3);
  }
  return out;
}

PpmImage parse_ppm(std::string_view bytes) {
  // Header tokens separated by single whitespace runs; comments unsupported.
  std::size_t pos = 0;
  auto token = [&]() {
    while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    const std::size_t start = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    if (start == pos) throw FormatError("ppm: truncated header");
    return bytes.substr(start, pos - start);
  };
  auto number = [&]() {
    auto t = token();
    int v = 0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || p != t.data() + t.size()) throw FormatError("ppm: bad header number");
    return v;
  };
  if (token() != "P6") throw FormatError("ppm: expected P6 magic");
  PpmImage img;
  img.width = number();
  img.height = number();
  if (number() != 255) throw FormatError("ppm: only maxval 255 supported");
  ++pos;  // single whitespace after maxval
  const std::size_t n = 3 * static_cast<std::size_t>(img.width) * img.height;
  if (bytes.size() != pos + n) {
    throw FormatError("ppm: expected " + std::to_string(n) + " payload bytes, got " + std::to_string(bytes.size() - pos));
  }
  img.rgb.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.end());
  return img;
}

std::string save_model(const ProjectionStack& stack) {
  stack.validate();
  std::string out(kModelMagic);
  put_le<std::uint32_t>(out, kModelVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(stack.thetas.size()));
  for (const auto& t : stack.thetas) put_matrix(out, t);
  out.push_back(stack.p ? '\1' : '\0');
  if (stack.p) put_matrix(out, *stack.p);
  return out;
}

ProjectionStack load_model(std::string_view bytes) {
  Reader r(bytes);
  if (r.take_bytes(kModelMagic.size()) != kModelMagic) throw FormatError("model stream: bad magic");
  const auto version = r.take<std::uint32_t>();
  if (version != kModelVersion) {
    throw FormatError("model stream: version " + std::to_string(version) + " unsupported (expected " +
                      std::to_string(kModelVersion) + ")");
  }
  const auto m = r.take<std::uint32_t>();
  ProjectionStack stack;
  for (std::uint32_t l = 0; l < m; ++l) stack.thetas.push_back(take_matrix(r));
  const auto has_p = r.take<std::uint8_t>();
  if (has_p > 1) throw FormatError("model stream: bad P marker");
  if (has_p) stack.p = take_matrix(r);
  if (!r.done()) throw FormatError("model stream: trailing bytes");
  try {
    stack.validate();
  } catch (const InputError& e) {
    throw FormatError(std::string("model stream: ") + e.what());
  }
  return stack;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("short write to " + path.string());
}

std::string format_real(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, p);
}

}  // namespace jpsa::io
