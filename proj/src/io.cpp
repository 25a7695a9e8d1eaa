#include "fpm/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace fpm {

namespace {

constexpr std::uint16_t kFormatVersion = 1;
constexpr std::size_t kHeaderBytes = 14;  // magic(4) + version(2) + rows(4) + cols(4)
constexpr std::size_t kMaxElements = std::size_t{1} << 24;

void put_le(std::string& out, std::uint64_t v, int nbytes) {
  for (int i = 0; i < nbytes; ++i)
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64(std::string& out, double v) {
  put_le(out, std::bit_cast<std::uint64_t>(v), 8);
}

std::uint64_t get_le(const std::string& bytes, std::size_t pos, int nbytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < nbytes; ++i)
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[pos + i])) << (8 * i);
  return v;
}

double get_f64(const std::string& bytes, std::size_t pos) {
  return std::bit_cast<double>(get_le(bytes, pos, 8));
}

void write_bytes(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail_io("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail_io("write failed for '" + path.string() + "'");
}

std::string read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail_io("cannot open '" + path.string() + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) fail_io("read failed for '" + path.string() + "'");
  return std::move(buf).str();
}

struct Header {
  char magic[5] = {0};
  std::uint16_t version = 0;
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
};

Header parse_header(const std::string& bytes, const char* expected_magic,
                    const std::filesystem::path& path) {
  if (bytes.size() < kHeaderBytes)
    fail_io("'" + path.string() + "': truncated header");
  Header h;
  std::memcpy(h.magic, bytes.data(), 4);
  if (std::memcmp(h.magic, expected_magic, 4) != 0)
    fail_io("'" + path.string() + "': bad magic '" + std::string(h.magic, 4) + "', expected '" +
            expected_magic + "'");
  h.version = static_cast<std::uint16_t>(get_le(bytes, 4, 2));
  if (h.version > kFormatVersion)
    fail_io("'" + path.string() + "': unsupported version " + std::to_string(h.version));
  h.rows = static_cast<std::uint32_t>(get_le(bytes, 6, 4));
  h.cols = static_cast<std::uint32_t>(get_le(bytes, 10, 4));
  if (h.rows == 0 || h.cols == 0 ||
      static_cast<std::size_t>(h.rows) * h.cols > kMaxElements)
    fail_io("'" + path.string() + "': header dimensions out of range");
  return h;
}

void check_payload(const std::string& bytes, std::size_t expected,
                   const std::filesystem::path& path) {
  const std::size_t have = bytes.size() - kHeaderBytes;
  if (have < expected) fail_io("'" + path.string() + "': truncated payload");
  if (have > expected) fail_io("'" + path.string() + "': trailing data after payload");
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_field(const std::filesystem::path& path, const Field2D& field) {
  if (field.empty()) fail_invalid("write_field: empty field");
  if (!all_finite(field)) fail_invalid("write_field: field has non-finite entries");
  std::string bytes;
  bytes.reserve(kHeaderBytes + field.size() * 16);
  bytes.append("FPMC");
  put_le(bytes, kFormatVersion, 2);
  put_le(bytes, static_cast<std::uint32_t>(field.rows()), 4);
  put_le(bytes, static_cast<std::uint32_t>(field.cols()), 4);
  for (std::size_t i = 0; i < field.size(); ++i) {
    put_f64(bytes, field[i].real());
    put_f64(bytes, field[i].imag());
  }
  write_bytes(path, bytes);
}

Field2D read_field(const std::filesystem::path& path) {
  const std::string bytes = read_bytes(path);
  const Header h = parse_header(bytes, "FPMC", path);
  const std::size_t count = static_cast<std::size_t>(h.rows) * h.cols;
  check_payload(bytes, count * 16, path);
  std::vector<cdouble> data(count);
  for (std::size_t i = 0; i < count; ++i)
    data[i] = cdouble(get_f64(bytes, kHeaderBytes + 16 * i),
                      get_f64(bytes, kHeaderBytes + 16 * i + 8));
  Field2D f = Field2D::from_data(static_cast<int>(h.rows), static_cast<int>(h.cols),
                                 std::move(data));
  if (!all_finite(f)) fail_io("'" + path.string() + "': non-finite entries in payload");
  return f;
}

void write_image(const std::filesystem::path& path, const RealImage2D& image, ImageKind kind) {
  if (image.empty()) fail_invalid("write_image: empty image");
  if (!all_finite(image)) fail_invalid("write_image: image has non-finite entries");
  if (kind == ImageKind::measurement)
    for (std::size_t i = 0; i < image.size(); ++i)
      if (image[i] < 0.0) fail_invalid("write_image: measurement image has negative entries");
  std::string bytes;
  bytes.reserve(kHeaderBytes + image.size() * 8);
  bytes.append("FPMR");
  put_le(bytes, kFormatVersion, 2);
  put_le(bytes, static_cast<std::uint32_t>(image.rows()), 4);
  put_le(bytes, static_cast<std::uint32_t>(image.cols()), 4);
  for (std::size_t i = 0; i < image.size(); ++i) put_f64(bytes, image[i]);
  write_bytes(path, bytes);
}

RealImage2D read_image(const std::filesystem::path& path, ImageKind kind) {
  const std::string bytes = read_bytes(path);
  const Header h = parse_header(bytes, "FPMR", path);
  const std::size_t count = static_cast<std::size_t>(h.rows) * h.cols;
  check_payload(bytes, count * 8, path);
  std::vector<double> data(count);
  for (std::size_t i = 0; i < count; ++i) data[i] = get_f64(bytes, kHeaderBytes + 8 * i);
  RealImage2D img = RealImage2D::from_data(static_cast<int>(h.rows), static_cast<int>(h.cols),
                                           std::move(data));
  if (!all_finite(img)) fail_io("'" + path.string() + "': non-finite entries in payload");
  if (kind == ImageKind::measurement)
    for (std::size_t i = 0; i < img.size(); ++i)
      if (img[i] < 0.0)
        fail_invalid("'" + path.string() + "': measurement image has negative entries");
  return img;
}

void write_manifest(const std::filesystem::path& path, const DatasetManifest& m) {
  std::ostringstream out;
  out << "fpm_manifest 1\n";
  out << "led_pitch_mm " << fmt_double(m.geometry.led_pitch_mm) << "\n";
  out << "led_distance_mm " << fmt_double(m.geometry.led_distance_mm) << "\n";
  out << "wavelength_um " << fmt_double(m.geometry.wavelength_um) << "\n";
  out << "numerical_aperture " << fmt_double(m.geometry.numerical_aperture) << "\n";
  out << "magnification " << fmt_double(m.geometry.magnification) << "\n";
  out << "camera_pixel_um " << fmt_double(m.geometry.camera_pixel_um) << "\n";
  out << "grid_half_extent " << m.geometry.grid_half_extent << "\n";
  if (m.geometry.led_whitelist)
    for (const auto& led : *m.geometry.led_whitelist)
      out << "whitelist_led " << led[0] << " " << led[1] << "\n";
  out << "n " << m.n1 << " " << m.n2 << "\n";
  out << "m " << m.m1 << " " << m.m2 << "\n";
  out << "seed " << m.seed << "\n";
  if (m.noise.kind == NoiseModel::Kind::none)
    out << "noise none\n";
  else
    out << "noise gaussian " << fmt_double(m.noise.sigma) << "\n";
  if (m.plan_type == PlanType::sequential)
    out << "plan sequential\n";
  else
    out << "plan random " << m.plan_group << "\n";
  for (const auto& set : m.plan.sets) {
    out << "set " << set.size() << "\n";
    for (const LedOffset& led : set)
      out << "led " << led.led_index << " " << fmt_double(led.freq_cycles_per_um[0]) << " "
          << fmt_double(led.freq_cycles_per_um[1]) << " " << led.pixel_offset[0] << " "
          << led.pixel_offset[1] << "\n";
  }

  std::ofstream file(path, std::ios::trunc);
  if (!file) fail_io("cannot open '" + path.string() + "' for writing");
  file << out.str();
  if (!file) fail_io("write failed for '" + path.string() + "'");
}

namespace {

class ManifestParser {
public:
  explicit ManifestParser(const std::filesystem::path& path) : path_(path) {}

  DatasetManifest parse(std::istream& in) {
    std::string line;
    while (std::getline(in, line)) {
      ++line_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      std::istringstream ls(line);
      std::string key;
      if (!(ls >> key) || key[0] == '#') continue;
      handle(key, ls);
    }
    finish();
    return manifest_;
  }

private:
  [[noreturn]] void fail(const std::string& msg) const {
    fail_io("'" + path_.string() + "' line " + std::to_string(line_) + ": " + msg);
  }

  double want_double(std::istringstream& ls, const std::string& key) {
    std::string tok;
    if (!(ls >> tok)) fail("key '" + key + "' expects a number");
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size() || !std::isfinite(v))
      fail("malformed number '" + tok + "' for key '" + key + "'");
    return v;
  }

  long long want_int(std::istringstream& ls, const std::string& key) {
    std::string tok;
    if (!(ls >> tok)) fail("key '" + key + "' expects an integer");
    char* end = nullptr;
    const long long v = std::strtoll(tok.c_str(), &end, 10);
    if (end != tok.c_str() + tok.size()) fail("malformed integer '" + tok + "' for key '" + key + "'");
    return v;
  }

  std::uint64_t want_u64(std::istringstream& ls, const std::string& key) {
    std::string tok;
    if (!(ls >> tok)) fail("key '" + key + "' expects an unsigned integer");
    char* end = nullptr;
    const unsigned long long v = std::strtoull(tok.c_str(), &end, 10);
    if (end != tok.c_str() + tok.size() || tok[0] == '-')
      fail("malformed unsigned integer '" + tok + "' for key '" + key + "'");
    return v;
  }

  void want_done(std::istringstream& ls, const std::string& key) {
    std::string extra;
    if (ls >> extra) fail("unexpected trailing token '" + extra + "' after key '" + key + "'");
  }

  void note_scalar(const std::string& key) {
    if (!seen_.insert(key).second) fail("duplicate key '" + key + "'");
  }

  void handle(const std::string& key, std::istringstream& ls) {
    if (key == "led" ) {
      handle_led(ls);
      return;
    }
    if (in_set_ && pending_leds_ > 0)
      fail("expected " + std::to_string(pending_leds_) + " more 'led' line(s) in the open set");

    if (key == "fpm_manifest") {
      note_scalar(key);
      const long long v = want_int(ls, key);
      if (v != 1) fail("unsupported manifest version " + std::to_string(v));
      want_done(ls, key);
    } else if (key == "led_pitch_mm") {
      note_scalar(key);
      manifest_.geometry.led_pitch_mm = want_double(ls, key);
      want_done(ls, key);
    } else if (key == "led_distance_mm") {
      note_scalar(key);
      manifest_.geometry.led_distance_mm = want_double(ls, key);
      want_done(ls, key);
    } else if (key == "wavelength_um") {
      note_scalar(key);
      manifest_.geometry.wavelength_um = want_double(ls, key);
      want_done(ls, key);
    } else if (key == "numerical_aperture") {
      note_scalar(key);
      manifest_.geometry.numerical_aperture = want_double(ls, key);
      want_done(ls, key);
    } else if (key == "magnification") {
      note_scalar(key);
      manifest_.geometry.magnification = want_double(ls, key);
      want_done(ls, key);
    } else if (key == "camera_pixel_um") {
      note_scalar(key);
      manifest_.geometry.camera_pixel_um = want_double(ls, key);
      want_done(ls, key);
    } else if (key == "grid_half_extent") {
      note_scalar(key);
      manifest_.geometry.grid_half_extent = static_cast<int>(want_int(ls, key));
      want_done(ls, key);
    } else if (key == "whitelist_led") {
      const int u = static_cast<int>(want_int(ls, key));
      const int v = static_cast<int>(want_int(ls, key));
      want_done(ls, key);
      if (!manifest_.geometry.led_whitelist)
        manifest_.geometry.led_whitelist.emplace();
      manifest_.geometry.led_whitelist->push_back({u, v});
    } else if (key == "n") {
      note_scalar(key);
      manifest_.n1 = static_cast<int>(want_int(ls, key));
      manifest_.n2 = static_cast<int>(want_int(ls, key));
      want_done(ls, key);
    } else if (key == "m") {
      note_scalar(key);
      manifest_.m1 = static_cast<int>(want_int(ls, key));
      manifest_.m2 = static_cast<int>(want_int(ls, key));
      want_done(ls, key);
    } else if (key == "seed") {
      note_scalar(key);
      manifest_.seed = want_u64(ls, key);
      want_done(ls, key);
    } else if (key == "noise") {
      note_scalar(key);
      std::string kind;
      if (!(ls >> kind)) fail("key 'noise' expects a model name");
      if (kind == "none") {
        manifest_.noise = NoiseModel{};
      } else if (kind == "gaussian") {
        manifest_.noise.kind = NoiseModel::Kind::gaussian;
        manifest_.noise.sigma = want_double(ls, key);
      } else {
        fail("unknown noise model '" + kind + "'");
      }
      want_done(ls, key);
    } else if (key == "plan") {
      note_scalar(key);
      std::string kind;
      if (!(ls >> kind)) fail("key 'plan' expects sequential or random");
      if (kind == "sequential") {
        manifest_.plan_type = PlanType::sequential;
      } else if (kind == "random") {
        manifest_.plan_type = PlanType::random;
        manifest_.plan_group = static_cast<int>(want_int(ls, key));
      } else {
        fail("unknown plan type '" + kind + "'");
      }
      want_done(ls, key);
    } else if (key == "set") {
      const long long count = want_int(ls, key);
      want_done(ls, key);
      if (count <= 0) fail("set size must be positive");
      manifest_.plan.sets.emplace_back();
      pending_leds_ = count;
      in_set_ = true;
    } else {
      fail("unknown key '" + key + "'");
    }
  }

  void handle_led(std::istringstream& ls) {
    if (!in_set_ || pending_leds_ == 0) fail("'led' line outside of a set");
    LedOffset led;
    led.led_index = static_cast<int>(want_int(ls, "led"));
    led.freq_cycles_per_um[0] = want_double(ls, "led");
    led.freq_cycles_per_um[1] = want_double(ls, "led");
    led.pixel_offset[0] = static_cast<int>(want_int(ls, "led"));
    led.pixel_offset[1] = static_cast<int>(want_int(ls, "led"));
    want_done(ls, "led");
    manifest_.plan.sets.back().push_back(led);
    if (--pending_leds_ == 0) in_set_ = false;
  }

  void finish() const {
    if (pending_leds_ > 0)
      fail_io("'" + path_.string() + "': unexpected end of file inside a set");
    static const char* const required[] = {
        "fpm_manifest",   "led_pitch_mm", "led_distance_mm", "wavelength_um",
        "numerical_aperture", "magnification", "camera_pixel_um", "grid_half_extent",
        "n",              "m",            "seed",            "noise",
        "plan"};
    for (const char* key : required)
      if (!seen_.count(key))
        fail_io("'" + path_.string() + "': missing required key '" + std::string(key) + "'");
  }

  std::filesystem::path path_;
  DatasetManifest manifest_;
  std::set<std::string> seen_;
  long long pending_leds_ = 0;
  bool in_set_ = false;
  int line_ = 0;
};

}  // namespace

DatasetManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail_io("cannot open '" + path.string() + "' for reading");
  ManifestParser parser(path);
  DatasetManifest manifest = parser.parse(in);
  manifest.validate();  // surfaces plan violations from the loaded offsets
  return manifest;
}

void write_trace_csv(const std::filesystem::path& path, const SolverTrace& trace) {
  if (trace.costs.size() != trace.grad_norms.size())
    fail_invalid("write_trace_csv: costs and grad_norms lengths differ");
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail_io("cannot open '" + path.string() + "' for writing");
  out << "iter,cost,grad_norm\n";
  for (std::size_t t = 0; t < trace.costs.size(); ++t)
    out << t << "," << fmt_double(trace.costs[t]) << "," << fmt_double(trace.grad_norms[t])
        << "\n";
  if (!out) fail_io("write failed for '" + path.string() + "'");
}

double relative_error_mod_phase(const Field2D& s, const Field2D& s_ref) {
  if (!s.same_shape(s_ref)) fail_invalid("relative_error_mod_phase: shape mismatch");
  const double ref_norm = norm2(s_ref);
  if (ref_norm == 0.0) fail_invalid("relative_error_mod_phase: reference is zero");
  const cdouble z = dot(s, s_ref);
  const cdouble rot = std::polar(1.0, std::arg(z));
  double acc = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) acc += std::norm(s[i] - rot * s_ref[i]);
  return std::sqrt(acc) / ref_norm;
}

}  // namespace fpm
