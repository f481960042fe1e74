#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "sqgw/cli.hpp"
#include "sqgw/io.hpp"
#include "sqgw/symmetry.hpp"

using namespace sqgw;
namespace fs = std::filesystem;

namespace {

std::string config_error(const std::string& text) {
  try {
    parse_config(text, "t.cfg");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Config);
    return e.what();
  }
  return "";
}

std::vector<unsigned char> read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("sqgw_test_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

int run(std::vector<std::string> args, std::string* out_text = nullptr) {
  args.insert(args.begin(), "sqgw");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int rc = run_command(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str() + err.str();
  return rc;
}

const char* kSmallConfig =
    "grid.nr = 64\n"
    "grid.nz = 64\n"
    "grid.Lr = 8\n"
    "grid.Lz = 8\n"
    "solver.max_iters = 30\n"
    "evolve.T = 0.1\n"
    "evolve.snapshot_every = 0.05\n";

}  // namespace

TEST_CASE("config defaults and overrides") {
  const auto c = parse_config("");
  CHECK(c.grid.nr == 256);
  CHECK(c.grid.nz == 256);
  CHECK(c.grid.Lr == 20.0);
  CHECK(c.grid.Lz == 20.0);
  CHECK(c.wave.c == 1.0);
  CHECK(c.wave.k == 0.1);
  CHECK(c.profile.kind == ProfileKind::Bump);
  CHECK(c.profile.build().f(c.profile.b) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(c.solver.max_iters == 5000);
  CHECK(c.evolve.T == 2.0);

  const auto d = parse_config("# comment\n\nwave.c = 2 # trailing\nprofile.kind = quadratic\n");
  CHECK(d.wave.c == 2.0);
  CHECK(d.evolve.T == 1.0);
  CHECK(d.profile.kind == ProfileKind::Quadratic);
}

TEST_CASE("config errors carry line numbers") {
  CHECK(config_error("grid.nr = 64\nbogus = 1\n").find("t.cfg:2:") != std::string::npos);
  CHECK(config_error("wave.c = 1\nwave.c = 2\n").find("t.cfg:2: duplicate") != std::string::npos);
  CHECK(config_error("\n\nwave.k = abc\n").find("t.cfg:3:") != std::string::npos);
  CHECK(config_error("wave.k = -1\n").find("t.cfg:1:") != std::string::npos);
  CHECK(config_error("wave.k\n").find("t.cfg:1:") != std::string::npos);
  CHECK(config_error("wave.k =\n").find("t.cfg:1:") != std::string::npos);
  CHECK(config_error("grid.nr = 64\ngrid.nz = 63\n").find("t.cfg:2:") != std::string::npos);
  CHECK(config_error("solver.backtrack = 1.5\n").find("t.cfg:1:") != std::string::npos);
  CHECK(config_error("evolve.cfl = 2\n").find("t.cfg:1:") != std::string::npos);
  CHECK(config_error("profile.a = 2\nprofile.b = 1\n").find("t.cfg:2:") != std::string::npos);
  CHECK(config_error("init.sigma = 0.1\n").find("t.cfg:1:") != std::string::npos);
  CHECK(config_error("solver.verify = maybe\n").find("t.cfg:1:") != std::string::npos);
  CHECK_THROWS_AS(load_config("/nonexistent/x.cfg"), Error);
}

TEST_CASE("config format round trip") {
  const auto c = parse_config("grid.nr = 128\nwave.k = 0.3\nprofile.a = 0.25\nsolver.verify = false\nseed = 99\n");
  const auto text = format_config(c);
  const auto d = parse_config(text);
  CHECK(format_config(d) == text);
  CHECK(d.grid == c.grid);
  CHECK(d.profile.amp == c.profile.amp);
  CHECK(d.seed == 99);
  CHECK_FALSE(d.solver.run_verify);
}

TEST_CASE("field file round trip is bit exact") {
  const GridSpec g{16, 24, 3.5, 2.25};
  std::mt19937_64 rng(61);
  auto f = oracle::random_field(g, rng, true);
  f[3] = -0.0;
  f[4] = std::numeric_limits<double>::denorm_min();
  const auto bytes = encode_field(f);
  CHECK(bytes.size() == kFieldHeaderBytes + 8 * g.size());
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "SQGF");
  const auto back = decode_field(bytes);
  CHECK(back.field.grid() == g);
  CHECK_FALSE(back.time.has_value());
  CHECK(std::memcmp(back.field.values().data(), f.values().data(), 8 * g.size()) == 0);

  const auto tagged = decode_field(encode_field(f, 1.25));
  REQUIRE(tagged.time.has_value());
  CHECK(*tagged.time == 1.25);

  TempDir dir("field");
  export_field(f, dir.path / "f.sqgf", 0.5);
  const auto loaded = import_field(dir.path / "f.sqgf");
  CHECK(read_bytes(dir.path / "f.sqgf") == encode_field(f, 0.5));
  CHECK(std::ranges::equal(loaded.field.values(), f.values(),
                           [](double a, double b) { return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b); }));
}

TEST_CASE("field decoding errors") {
  const GridSpec g{8, 8, 1, 1};
  const auto good = encode_field(ScalarField(g, 1.0));
  auto code = [](const std::vector<unsigned char>& b) {
    try {
      decode_field(b);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Usage;
  };
  auto bad_magic = good;
  bad_magic[0] = 'X';
  CHECK(code(bad_magic) == ErrorCode::BadMagic);
  auto short_payload = good;
  short_payload.resize(short_payload.size() - 8);
  CHECK(code(short_payload) == ErrorCode::TruncatedPayload);
  CHECK(code({good.begin(), good.begin() + 10}) == ErrorCode::TruncatedPayload);
  auto zero_dims = good;
  zero_dims[8] = zero_dims[9] = zero_dims[10] = zero_dims[11] = 0;
  CHECK(code(zero_dims) == ErrorCode::DimensionOverflow);
  auto huge = good;
  for (int b = 8; b < 16; ++b) huge[b] = 0xff;
  CHECK(code(huge) == ErrorCode::DimensionOverflow);
  CHECK_THROWS_AS(import_field("/nonexistent/f.sqgf"), Error);
}

TEST_CASE("csv export round trips through text") {
  const GridSpec g{8, 8, 2, 2};
  std::mt19937_64 rng(62);
  const auto f = oracle::random_field(g, rng, false);
  TempDir dir("csv");
  export_field_csv(f, dir.path / "f.csv");
  std::ifstream in(dir.path / "f.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == "r,z,value");
  std::size_t n = 0;
  while (std::getline(in, line)) {
    double r = 0, z = 0, v = 0;
    REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf", &r, &z, &v) == 3);
    const std::size_t i = n / g.nz, j = n % g.nz;
    CHECK(r == g.r(i));
    CHECK(z == g.z(j));
    CHECK(v == f(i, j));
    ++n;
  }
  CHECK(n == g.size());
}

TEST_CASE("heatmap mapping") {
  const GridSpec g{8, 6, 1, 1};
  const auto zero = heatmap_pixels(ScalarField(g));
  CHECK(zero.size() == g.size());
  CHECK(std::ranges::all_of(zero, [](unsigned char p) { return p == 128; }));

  std::mt19937_64 rng(63);
  const auto odd = symmetry_project(oracle::random_field(g, rng, true), MirrorSymmetry::OddR);
  const auto px = heatmap_pixels(odd);
  const double M = odd.max_abs();
  // Row 0 is the top (largest z); column 0 is the most negative r.
  for (std::size_t row = 0; row < g.nz; ++row)
    for (std::size_t col = 0; col < g.nr; ++col) {
      const std::size_t j = g.nz - 1 - row, i = col;
      const double v = odd(i, j);
      CHECK(px[row * g.nr + col] == static_cast<unsigned char>(std::floor(127.5 + 127.5 * v / M + 0.5)));
      const auto mirror = px[row * g.nr + (g.nr - 1 - col)];
      if (v != 0.0) CHECK(px[row * g.nr + col] + mirror == 255);
    }

  TempDir dir("pgm");
  render_heatmap(odd, dir.path / "a.pgm");
  render_heatmap(odd, dir.path / "b.pgm");
  const auto a = read_bytes(dir.path / "a.pgm");
  CHECK(a == read_bytes(dir.path / "b.pgm"));
  const std::string header = "P5\n8 6\n255\n";
  CHECK(std::string(a.begin(), a.begin() + static_cast<long>(header.size())) == header);
  CHECK(a.size() == header.size() + g.size());
}

TEST_CASE("exit code mapping") {
  CHECK(exit_code_for(ErrorCode::Config) == kExitUsage);
  CHECK(exit_code_for(ErrorCode::BadMagic) == kExitUsage);
  CHECK(exit_code_for(ErrorCode::GridMismatch) == kExitUsage);
  CHECK(exit_code_for(ErrorCode::TrivialTheta) == kExitValidation);
  CHECK(exit_code_for(ErrorCode::Stall) == kExitValidation);
  CHECK(exit_code_for(ErrorCode::BlowUp) == kExitValidation);
}

TEST_CASE("command line") {
  TempDir dir("cli");
  const auto cfg = dir.path / "small.cfg";
  write_text(cfg, kSmallConfig);
  const std::string c = cfg.string();

  CHECK(run({}) == kExitUsage);
  CHECK(run({"frobnicate"}) == kExitUsage);
  CHECK(run({"solve"}) == kExitUsage);
  CHECK(run({"solve", "--config", (dir.path / "missing.cfg").string()}) == kExitUsage);
  CHECK(run({"solve", "--config", c, "--bogus"}) == kExitUsage);

  std::string text;
  CHECK(run({"validate-profile", "--config", c, "--out", (dir.path / "vp").string()}, &text) == kExitOk);
  CHECK(fs::exists(dir.path / "vp" / "profile_report.json"));

  // A short solve does not converge: validation failure, outputs still written.
  // Reports echo the output directory, so both runs write to the same place.
  const auto s1 = dir.path / "s1", s2 = dir.path / "s2";
  CHECK(run({"solve", "--config", c, "--out", s1.string()}) == kExitValidation);
  fs::rename(s1, s2);
  CHECK(run({"solve", "--config", c, "--out", s1.string()}) == kExitValidation);
  for (const char* name : {"psi.sqgf", "theta.sqgf", "theta.pgm", "solve_report.json"}) {
    INFO(name);
    REQUIRE(fs::exists(s1 / name));
    CHECK(read_bytes(s1 / name) == read_bytes(s2 / name));
  }

  CHECK(run({"verify", "--field", (s1 / "psi.sqgf").string(), "--config", c, "--out", (dir.path / "v").string()}) ==
        kExitValidation);
  CHECK(fs::exists(dir.path / "v" / "verify_report.json"));

  export_field(ScalarField({64, 64, 8, 8}), dir.path / "zero.sqgf");
  CHECK(run({"verify", "--field", (dir.path / "zero.sqgf").string(), "--config", c, "--out",
             (dir.path / "vz").string()}, &text) == kExitValidation);
  CHECK(text.find("TrivialTheta") != std::string::npos);

  export_field(ScalarField({32, 32, 8, 8}), dir.path / "other.sqgf");
  CHECK(run({"verify", "--field", (dir.path / "other.sqgf").string(), "--config", c}) == kExitUsage);

  write_text(dir.path / "junk.sqgf", "nope, not a field file at all, definitely not");
  CHECK(run({"verify", "--field", (dir.path / "junk.sqgf").string(), "--config", c}) == kExitUsage);

  const auto ev = dir.path / "ev";
  const int rc = run({"evolve", "--field", (s1 / "theta.sqgf").string(), "--config", c, "--out", ev.string()});
  CHECK((rc == kExitOk || rc == kExitValidation));
  CHECK(fs::exists(ev / "evolve_report.json"));
  CHECK(fs::exists(ev / "theta_T.pgm"));
  const auto snap = import_field(ev / "snapshots" / "theta_0000.sqgf");
  REQUIRE(snap.time.has_value());
  CHECK(*snap.time == 0.0);
  CHECK(run({"evolve", "--field", (s1 / "theta.sqgf").string(), "--config", c, "--T", "-1"}) == kExitUsage);
  CHECK(run({"evolve", "--field", (s1 / "theta.sqgf").string(), "--config", c, "--cfl", "3"}) == kExitUsage);

  CHECK(run({"solve", "--config", c, "--out", (dir.path / "csv").string(), "--format", "csv"}) == kExitValidation);
  CHECK(fs::exists(dir.path / "csv" / "psi.csv"));
  CHECK(run({"solve", "--config", c, "--format", "xml"}) == kExitUsage);

  const auto sw = dir.path / "sw";
  CHECK(run({"sweep", "--config", c, "--c-list", "1,1.2", "--k-list", "0.1", "--out", sw.string()}) ==
        kExitValidation);
  CHECK(fs::exists(sw / "sweep_report.json"));
  CHECK(run({"sweep", "--config", c, "--c-list", "1,-1", "--k-list", "0.1"}) == kExitUsage);
}
