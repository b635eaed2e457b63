#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "doctest.h"
#include "faasim/cli.hpp"
#include "faasim/simcore.hpp"
#include "json.hpp"
#include "reference_sim.hpp"

namespace fs = std::filesystem;
using namespace faasim;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "faasim");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("faasim_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void write(const std::string& path, const std::string& text) { std::ofstream(path, std::ios::binary) << text; }

const char* kHandTrace = "# horizon_s=4\nt,function,count,duration_ms\n0,f1,1,1000\n2,f1,1,1000\n";

}  // namespace

TEST_CASE("usage errors exit 1, help exits 0") {
  CHECK(run({}).code == cli::kUsage);
  CHECK(run({"bogus"}).code == cli::kUsage);
  CHECK(run({"simulate"}).code == cli::kUsage);
  const auto help = run({"simulate", "--help"});
  CHECK(help.code == cli::kOk);
  CHECK(help.out.find("--keepalive") != std::string::npos);
}

TEST_CASE("simulate writes metrics and a manifest") {
  TempDir dir;
  write(dir / "trace.csv", kHandTrace);
  const auto r = run({"simulate", "--trace", dir / "trace.csv", "--out", dir / "sim"});
  REQUIRE(r.code == cli::kOk);
  const auto metrics = slurp(dir / "sim/metrics.csv");
  CHECK(std::count(metrics.begin(), metrics.end(), '\n') == 5);
  const auto manifest = nlohmann::json::parse(slurp(dir / "sim/manifest.json"));
  CHECK(manifest["command"] == "simulate");
  CHECK(manifest["parameters"]["keepalive"] == "fixed:900");
  CHECK(manifest["results"]["cold_starts"] == 1);
  CHECK(manifest["inputs"][0]["sha256"].get<std::string>().size() == 64);
}

TEST_CASE("simulate reports missing and malformed inputs") {
  TempDir dir;
  const auto missing = run({"simulate", "--trace", dir / "nope.csv", "--out", dir / "o"});
  CHECK(missing.code == cli::kIoError);
  CHECK(missing.err.find("nope.csv") != std::string::npos);

  write(dir / "bad.csv", "t,function,count,duration_ms\n0,f1,0,10\n");
  const auto bad = run({"simulate", "--trace", dir / "bad.csv", "--out", dir / "o"});
  CHECK(bad.code == cli::kDataError);
  CHECK(bad.err.find("line 2") != std::string::npos);
  CHECK(std::count(bad.err.begin(), bad.err.end(), '\n') == 1);

  write(dir / "ok.csv", kHandTrace);
  CHECK(run({"simulate", "--trace", dir / "ok.csv", "--keepalive", "fixed:15m", "--out", dir / "o"}).code ==
        cli::kDataError);
}

TEST_CASE("keep-alive flavours record different cold starts") {
  TempDir dir;
  // Two workers idle from t=1; halving at t=380 drops one before the t=500 pair arrives.
  const std::string trace = "# horizon_s=600\nt,function,count,duration_ms\n0,f,2,1000\n500,f,2,1000\n";
  write(dir / "trace.csv", trace);
  REQUIRE(run({"simulate", "--trace", dir / "trace.csv", "--keepalive", "fixed:900", "--out", dir / "a"}).code == 0);
  REQUIRE(run({"simulate", "--trace", dir / "trace.csv", "--keepalive", "halving:380", "--out", dir / "b"}).code == 0);
  const auto fixed = nlohmann::json::parse(slurp(dir / "a/manifest.json"))["results"]["cold_starts"].get<int>();
  const auto halving = nlohmann::json::parse(slurp(dir / "b/manifest.json"))["results"]["cold_starts"].get<int>();

  std::istringstream in(trace);
  const auto parsed = parse_trace(in);
  auto cold = [](const std::vector<TimestepMetrics>& s) {
    std::uint64_t n = 0;
    for (const auto& m : s) n += m.cold_starts;
    return static_cast<int>(n);
  };
  CHECK(fixed == cold(reference::simulate(parsed, FixedTimeout{900})));
  CHECK(halving == cold(reference::simulate(parsed, HalvingInterval{380})));
  CHECK(fixed == 2);
  CHECK(halving == 3);
}

TEST_CASE("energy over built-in profiles") {
  TempDir dir;
  write(dir / "trace.csv", kHandTrace);
  REQUIRE(run({"simulate", "--trace", dir / "trace.csv", "--out", dir / "sim"}).code == 0);
  const auto r = run({"energy", "--metrics", dir / "sim/metrics.csv", "--out", dir / "en"});
  REQUIRE(r.code == cli::kOk);
  CHECK(r.out.find("%") != std::string::npos);

  const auto csv = slurp(dir / "en/energy.csv");
  CHECK(csv.rfind("t,uvm_cum_j,uvm_reserve_cum_j,soc_cum_j,soc_idle_cum_j\n", 0) == 0);
  const auto last = csv.substr(csv.rfind("3,"));
  CHECK(last.find(",3.66,") != std::string::npos);

  const auto summary = nlohmann::json::parse(slurp(dir / "en/summary.json"));
  CHECK(summary["baseline"] == "uvm");
  CHECK(summary["rows"].size() == 4);
  const auto manifest = nlohmann::json::parse(slurp(dir / "en/manifest.json"));
  CHECK(manifest["parameters"]["capacity"] == 1);
  CHECK(manifest["parameters"]["capacity_source"] == "min_capacity");

  const auto low = run({"energy", "--metrics", dir / "sim/metrics.csv", "--capacity", "0", "--out", dir / "x"});
  CHECK(low.code == cli::kDataError);

  write(dir / "profiles.json", R"([{"name": "soc", "start_energy_j": 1.0}])");
  REQUIRE(run({"energy", "--metrics", dir / "sim/metrics.csv", "--profiles", dir / "profiles.json", "--select",
               "soc,uvm", "--out", dir / "sel"})
              .code == 0);
  const auto sel = slurp(dir / "sel/energy.csv");
  CHECK(sel.rfind("t,soc_cum_j,uvm_cum_j\n", 0) == 0);
  CHECK(sel.find("\n3,2,") != std::string::npos);
}

TEST_CASE("synth is deterministic per seed") {
  TempDir dir;
  const std::vector<std::string> flags = {"--functions", "5", "--horizon-s", "300", "--base-rps", "4", "--seed", "9"};
  auto args = flags;
  args.insert(args.begin(), "synth");
  auto a = args, b = args;
  a.insert(a.end(), {"--out", dir / "a.csv"});
  b.insert(b.end(), {"--out", dir / "b.csv"});
  REQUIRE(run(a).code == 0);
  REQUIRE(run(b).code == 0);
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
  CHECK(fs::exists(dir / "a.csv.manifest.json"));

  const auto flat = run({"synth", "--functions", "3", "--horizon-s", "50", "--base-rps", "6", "--amplitude", "0",
                         "--spike-rate", "0", "--duration", "fixed:100", "--out", dir / "flat.csv"});
  REQUIRE(flat.code == 0);
  std::ifstream in(dir / "flat.csv");
  const auto trace = parse_trace(in);
  std::vector<std::uint64_t> per(50, 0);
  for (const auto& r : trace.records) per[static_cast<std::size_t>(r.t)] += r.count;
  for (auto n : per) CHECK(n == 6);

  const auto bad = run({"synth", "--amplitude", "2", "--out", dir / "x.csv"});
  CHECK(bad.code == cli::kDataError);
  CHECK(bad.err.find("diurnal_amplitude") != std::string::npos);
  CHECK(run({"synth", "--duration", "weird", "--out", dir / "x.csv"}).code == cli::kDataError);
}

TEST_CASE("integrate prints six significant digits") {
  TempDir dir;
  write(dir / "const.csv", "t_s,power_w\n0,2\n1,2\n2,2\n3,2\n");
  write(dir / "ramp.csv", "t_s,power_w\n0,0\n1,2\n");
  write(dir / "pulse.csv", "t_s,power_w\n0,0.6\n1,0.6\n1.5,3.0\n3.5,3.0\n4,0.6\n5,0.6\n");
  CHECK(run({"integrate", "--samples", dir / "const.csv", "--t0", "0", "--t1", "3"}).out == "6.00000 J\n");
  CHECK(run({"integrate", "--samples", dir / "ramp.csv", "--t0", "0", "--t1", "1"}).out == "1.00000 J\n");
  CHECK(run({"integrate", "--samples", dir / "pulse.csv", "--t0", "0", "--t1", "5"}).out == "9.00000 J\n");
  CHECK(run({"integrate", "--samples", dir / "ramp.csv", "--t0", "0", "--t1", "2"}).code == cli::kDataError);
}

TEST_CASE("stats") {
  TempDir dir;
  write(dir / "trace.csv", "# horizon_s=10\nt,function,count,duration_ms\n0,f1,2,5\n5,f2,3,5\n");
  const auto r = run({"stats", "--trace", dir / "trace.csv"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("total_requests: 5\n") != std::string::npos);
  CHECK(r.out.find("avg_rps: 0.50\n") != std::string::npos);
  CHECK(r.out.find("function_count: 2\n") != std::string::npos);
}

TEST_CASE("pipeline output is byte-identical across runs and thread counts") {
  TempDir dir;
  REQUIRE(run({"synth", "--functions", "12", "--horizon-s", "1800", "--base-rps", "20", "--seed", "3", "--out",
               dir / "trace.csv"})
              .code == 0);
  for (const auto* threads : {"1", "4"}) {
    const std::string tag = threads;
    REQUIRE(run({"simulate", "--trace", dir / "trace.csv", "--threads", threads, "--out", dir / ("sim" + tag)})
                .code == 0);
    REQUIRE(run({"energy", "--metrics", dir / ("sim" + tag + "/metrics.csv"), "--out", dir / ("en" + tag)}).code ==
            0);
  }
  CHECK(slurp(dir / "sim1/metrics.csv") == slurp(dir / "sim4/metrics.csv"));
  CHECK(slurp(dir / "en1/energy.csv") == slurp(dir / "en4/energy.csv"));
  CHECK(slurp(dir / "en1/summary.json") == slurp(dir / "en4/summary.json"));
}

TEST_CASE("the built tool runs") {
  const std::string cmd = std::string(FAASIM_TOOL_PATH) + " --version > /dev/null";
  CHECK(std::system(cmd.c_str()) == 0);
}
