#include "sqgw/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

namespace sqgw {

Profile ProfileConfig::build() const {
  return kind == ProfileKind::Bump ? Profile::bump(a, b, amp) : Profile::quadratic();
}

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

class ConfigParser {
 public:
  ConfigParser(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(std::size_t line, const std::string& msg) const {
    throw Error(ErrorCode::Config, source_ + ":" + std::to_string(line) + ": " + msg);
  }

  double number(const std::string& v, std::size_t line) const {
    double out = 0.0;
    const auto* end = v.data() + v.size();
    const auto res = std::from_chars(v.data(), end, out);
    if (res.ec != std::errc() || res.ptr != end || !std::isfinite(out))
      fail(line, "expected a finite number, got '" + v + "'");
    return out;
  }

  std::uint64_t integer(const std::string& v, std::size_t line) const {
    std::uint64_t out = 0;
    const auto* end = v.data() + v.size();
    const auto res = std::from_chars(v.data(), end, out);
    if (res.ec != std::errc() || res.ptr != end) fail(line, "expected a non-negative integer, got '" + v + "'");
    return out;
  }

  int small_int(const std::string& v, std::size_t line) const {
    const auto x = integer(v, line);
    if (x > static_cast<std::uint64_t>(std::numeric_limits<int>::max())) fail(line, "integer out of range");
    return static_cast<int>(x);
  }

  bool boolean(const std::string& v, std::size_t line) const {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    fail(line, "expected true or false, got '" + v + "'");
  }

  double positive(const std::string& v, std::size_t line) const {
    const double x = number(v, line);
    if (!(x > 0.0)) fail(line, "value must be positive");
    return x;
  }

  Config parse(const std::string& text) {
    Config c;
    using Setter = std::function<void(const std::string&, std::size_t)>;
    const std::map<std::string, Setter> setters = {
        {"grid.nr", [&](auto& v, auto l) { c.grid.nr = integer(v, l); }},
        {"grid.nz", [&](auto& v, auto l) { c.grid.nz = integer(v, l); }},
        {"grid.Lr", [&](auto& v, auto l) { c.grid.Lr = positive(v, l); }},
        {"grid.Lz", [&](auto& v, auto l) { c.grid.Lz = positive(v, l); }},
        {"wave.c", [&](auto& v, auto l) { c.wave.c = positive(v, l); }},
        {"wave.k", [&](auto& v, auto l) { c.wave.k = positive(v, l); }},
        {"profile.kind",
         [&](auto& v, auto l) {
           try {
             c.profile.kind = parse_profile_kind(v);
           } catch (const Error& e) {
             fail(l, e.what());
           }
         }},
        {"profile.a", [&](auto& v, auto l) { c.profile.a = number(v, l); }},
        {"profile.b", [&](auto& v, auto l) { c.profile.b = number(v, l); }},
        {"profile.amp", [&](auto& v, auto l) { c.profile.amp = positive(v, l); }},
        {"solver.max_iters", [&](auto& v, auto l) { c.solver.max_iters = small_int(v, l); }},
        {"solver.step0", [&](auto& v, auto l) { c.solver.step0 = positive(v, l); }},
        {"solver.backtrack", [&](auto& v, auto l) { c.solver.backtrack = number(v, l); }},
        {"solver.grad_tol", [&](auto& v, auto l) { c.solver.grad_tol = positive(v, l); }},
        {"solver.residual_tol", [&](auto& v, auto l) { c.solver.residual_tol = positive(v, l); }},
        {"solver.steiner_every", [&](auto& v, auto l) { c.solver.steiner_every = small_int(v, l); }},
        {"solver.armijo", [&](auto& v, auto l) { c.solver.armijo = positive(v, l); }},
        {"solver.max_backtracks", [&](auto& v, auto l) { c.solver.max_backtracks = small_int(v, l); }},
        {"solver.verify", [&](auto& v, auto l) { c.solver.run_verify = boolean(v, l); }},
        {"init.r0", [&](auto& v, auto l) { c.init.r0 = positive(v, l); }},
        {"init.amplitude_factor", [&](auto& v, auto l) { c.init.amplitude_factor = positive(v, l); }},
        {"init.sigma", [&](auto& v, auto l) { c.init.sigma = positive(v, l); }},
        {"evolve.T", [&](auto& v, auto l) { c.evolve.T = positive(v, l); }},
        {"evolve.cfl", [&](auto& v, auto l) { c.evolve.cfl = positive(v, l); }},
        {"evolve.dealias", [&](auto& v, auto l) { c.evolve.dealias = boolean(v, l); }},
        {"evolve.snapshot_every", [&](auto& v, auto l) { c.evolve.snapshot_every = positive(v, l); }},
        {"evolve.speed_tol", [&](auto& v, auto l) { c.evolve_speed_tol = positive(v, l); }},
        {"evolve.shape_tol", [&](auto& v, auto l) { c.evolve_shape_tol = positive(v, l); }},
        {"output.dir",
         [&](auto& v, auto l) {
           if (v.empty()) fail(l, "output.dir must not be empty");
           c.output_dir = v;
         }},
        {"seed", [&](auto& v, auto l) { c.seed = integer(v, l); }},
    };

    std::istringstream in(text);
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
      ++line;
      const auto hash = raw.find('#');
      const std::string body = trim(std::string_view(raw).substr(0, hash));
      if (body.empty()) continue;
      const auto eq = body.find('=');
      if (eq == std::string::npos) fail(line, "expected 'key = value'");
      const std::string key = trim(std::string_view(body).substr(0, eq));
      const std::string value = trim(std::string_view(body).substr(eq + 1));
      if (key.empty()) fail(line, "missing key");
      const auto it = setters.find(key);
      if (it == setters.end()) fail(line, "unknown key '" + key + "'");
      if (!lines_.emplace(key, line).second)
        fail(line, "duplicate key '" + key + "' (first set on line " + std::to_string(lines_[key]) + ")");
      if (value.empty()) fail(line, "missing value for '" + key + "'");
      it->second(value, line);
    }

    if (c.profile.kind == ProfileKind::Bump && !lines_.contains("profile.amp")) {
      check("profile", [&] { c.profile.amp = 1.0 / Profile::bump(c.profile.a, c.profile.b, 1.0).f(c.profile.b); });
    }
    if (!lines_.contains("evolve.T")) c.evolve.T = 2.0 / c.wave.c;

    check("grid", [&] { c.grid.validate(); });
    check("wave", [&] { c.wave.validate(); });
    check("profile", [&] { c.profile.build(); });
    check("solver", [&] { c.solver.validate(); });
    check("evolve", [&] { c.evolve.validate(); });
    check("init", [&] {
      if (!(c.init.sigma > 2.0 * std::max(c.grid.hr(), c.grid.hz())))
        throw Error(ErrorCode::InvalidArgument, "init.sigma must exceed two cells");
      if (!(c.init.amplitude_factor > 1.0))
        throw Error(ErrorCode::InvalidArgument, "init.amplitude_factor must exceed 1");
    });
    return c;
  }

 private:
  // Runs a section validator; failures are reported at the section's last
  // assignment, or at the file level when the section relies on defaults.
  template <class Fn>
  void check(const std::string& section, Fn&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      std::size_t line = 0;
      for (const auto& [key, l] : lines_)
        if (key.starts_with(section + ".")) line = std::max(line, l);
      if (line == 0) throw Error(ErrorCode::Config, source_ + ": " + e.what());
      fail(line, e.what());
    }
  }

  std::string source_;
  std::map<std::string, std::size_t> lines_;
};

}  // namespace

Config parse_config(const std::string& text, const std::string& source) {
  return ConfigParser(source).parse(text);
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Config, "cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

std::string format_config(const Config& c) {
  std::ostringstream o;
  o << "grid.nr = " << c.grid.nr << "\n"
    << "grid.nz = " << c.grid.nz << "\n"
    << "grid.Lr = " << fmt(c.grid.Lr) << "\n"
    << "grid.Lz = " << fmt(c.grid.Lz) << "\n"
    << "wave.c = " << fmt(c.wave.c) << "\n"
    << "wave.k = " << fmt(c.wave.k) << "\n"
    << "profile.kind = " << to_string(c.profile.kind) << "\n"
    << "profile.a = " << fmt(c.profile.a) << "\n"
    << "profile.b = " << fmt(c.profile.b) << "\n"
    << "profile.amp = " << fmt(c.profile.amp) << "\n"
    << "solver.max_iters = " << c.solver.max_iters << "\n"
    << "solver.step0 = " << fmt(c.solver.step0) << "\n"
    << "solver.backtrack = " << fmt(c.solver.backtrack) << "\n"
    << "solver.grad_tol = " << fmt(c.solver.grad_tol) << "\n"
    << "solver.residual_tol = " << fmt(c.solver.residual_tol) << "\n"
    << "solver.steiner_every = " << c.solver.steiner_every << "\n"
    << "solver.armijo = " << fmt(c.solver.armijo) << "\n"
    << "solver.max_backtracks = " << c.solver.max_backtracks << "\n"
    << "solver.verify = " << (c.solver.run_verify ? "true" : "false") << "\n"
    << "init.r0 = " << fmt(c.init.r0) << "\n"
    << "init.amplitude_factor = " << fmt(c.init.amplitude_factor) << "\n"
    << "init.sigma = " << fmt(c.init.sigma) << "\n"
    << "evolve.T = " << fmt(c.evolve.T) << "\n"
    << "evolve.cfl = " << fmt(c.evolve.cfl) << "\n"
    << "evolve.dealias = " << (c.evolve.dealias ? "true" : "false") << "\n"
    << "evolve.snapshot_every = " << fmt(c.evolve.snapshot_every) << "\n"
    << "evolve.speed_tol = " << fmt(c.evolve_speed_tol) << "\n"
    << "evolve.shape_tol = " << fmt(c.evolve_shape_tol) << "\n"
    << "output.dir = " << c.output_dir << "\n"
    << "seed = " << c.seed << "\n";
  return o.str();
}

namespace {

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<unsigned char>(v >> (8 * b)));
}

void put_f64(std::vector<unsigned char>& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<unsigned char>(bits >> (8 * b)));
}

std::uint32_t get_u32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int b = 3; b >= 0; --b) v = (v << 8) | p[b];
  return v;
}

double get_f64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int b = 7; b >= 0; --b) v = (v << 8) | p[b];
  return std::bit_cast<double>(v);
}

}  // namespace

std::vector<unsigned char> encode_field(const ScalarField& f, std::optional<double> time) {
  const auto& g = f.grid();
  if (g.nr > std::numeric_limits<std::uint32_t>::max() || g.nz > std::numeric_limits<std::uint32_t>::max())
    throw Error(ErrorCode::DimensionOverflow, "grid dimensions exceed 32 bits");
  std::vector<unsigned char> out;
  out.reserve(kFieldHeaderBytes + 8 * (f.size() + 1));
  for (char ch : {'S', 'Q', 'G', 'F'}) out.push_back(static_cast<unsigned char>(ch));
  put_u32(out, kFieldFormatVersion);
  put_u32(out, static_cast<std::uint32_t>(g.nr));
  put_u32(out, static_cast<std::uint32_t>(g.nz));
  put_f64(out, g.Lr);
  put_f64(out, g.Lz);
  for (double v : f.values()) put_f64(out, v);
  if (time) put_f64(out, *time);
  return out;
}

FieldData decode_field(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "SQGF", 4) != 0)
    throw Error(ErrorCode::BadMagic, "not a field file (magic mismatch)");
  if (bytes.size() < kFieldHeaderBytes) throw Error(ErrorCode::TruncatedPayload, "header is truncated");
  const auto version = get_u32(bytes.data() + 4);
  if (version != kFieldFormatVersion)
    throw Error(ErrorCode::BadMagic, "unsupported field format version " + std::to_string(version));
  const std::uint64_t nr = get_u32(bytes.data() + 8);
  const std::uint64_t nz = get_u32(bytes.data() + 12);
  const std::uint64_t max_cells = (std::numeric_limits<std::size_t>::max() - kFieldHeaderBytes) / 8 - 1;
  if (nr == 0 || nz == 0 || nr > max_cells / nz)
    throw Error(ErrorCode::DimensionOverflow, "header dimensions " + std::to_string(nr) + " x " +
                                                  std::to_string(nz) + " are not addressable");
  const std::uint64_t cells = nr * nz;
  const std::size_t payload = bytes.size() - kFieldHeaderBytes;
  const std::size_t expected = static_cast<std::size_t>(cells) * 8;
  if (payload != expected && payload != expected + 8)
    throw Error(ErrorCode::TruncatedPayload, "payload holds " + std::to_string(payload) + " bytes, header implies " +
                                                 std::to_string(expected));

  GridSpec g{static_cast<std::size_t>(nr), static_cast<std::size_t>(nz), get_f64(bytes.data() + 16),
             get_f64(bytes.data() + 24)};
  std::vector<double> values(static_cast<std::size_t>(cells));
  const unsigned char* p = bytes.data() + kFieldHeaderBytes;
  for (std::size_t n = 0; n < values.size(); ++n) values[n] = get_f64(p + 8 * n);
  FieldData out{ScalarField(g, std::move(values)), std::nullopt};
  if (payload == expected + 8) out.time = get_f64(p + expected);
  return out;
}

void export_field(const ScalarField& f, const std::filesystem::path& path, std::optional<double> time) {
  const auto bytes = encode_field(f, time);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

FieldData import_field(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open field file " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  auto out = decode_field(bytes);
  // The grid header was written by validate()d code; reject hand-edited junk.
  out.field.grid().validate();
  return out;
}

void export_field_csv(const ScalarField& f, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  const auto& g = f.grid();
  char buf[96];
  out << "r,z,value\n";
  for (std::size_t i = 0; i < g.nr; ++i)
    for (std::size_t j = 0; j < g.nz; ++j) {
      const int n = std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", g.r(i), g.z(j), f(i, j));
      out.write(buf, n);
    }
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

std::vector<unsigned char> heatmap_pixels(const ScalarField& f) {
  if (!f.all_finite()) throw Error(ErrorCode::NonFinite, "heatmap input contains non-finite values");
  const auto& g = f.grid();
  const double m = f.max_abs();
  std::vector<unsigned char> px(g.size());
  for (std::size_t row = 0; row < g.nz; ++row) {
    const std::size_t j = g.nz - 1 - row;
    for (std::size_t i = 0; i < g.nr; ++i) {
      const double v = m > 0.0 ? f(i, j) / m : 0.0;
      const double level = std::floor(127.5 + 127.5 * v + 0.5);
      px[row * g.nr + i] = static_cast<unsigned char>(std::clamp(level, 0.0, 255.0));
    }
  }
  return px;
}

void render_heatmap(const ScalarField& f, const std::filesystem::path& path) {
  const auto px = heatmap_pixels(f);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << "P5\n" << f.grid().nr << " " << f.grid().nz << "\n255\n";
  out.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

}  // namespace sqgw
