#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "streetsim/export.hpp"
#include "support.hpp"

using namespace streetsim;
using doctest::Approx;
namespace fs = std::filesystem;

namespace {

/// Shared tiny dataset: generated once, reused by the eval/inspect cases.
/// Four frames at 2 s spacing give the vehicles time to close in on the
/// camera, so later frames carry real boxes.
struct CliDataset {
  testsupport::TempDir dir{"cli-ds"};
  fs::path config_path;
  fs::path out_dir;
  int generate_exit = -1;
  std::string generate_output;

  CliDataset() {
    config_path = dir.path / "run.json";
    out_dir = dir.path / "out";
    write_text_file(config_path, R"({
      "seed": 11,
      "traffic": {"target_vehicles": 6, "target_pedestrians": 8},
      "capture": {"period": 2.0, "total_frames": 4}
    })");
    const testsupport::CommandResult res = testsupport::run_command(
        testsupport::cli_path() + " generate --config " + config_path.string() + " --out " +
        out_dir.string());
    generate_exit = res.exit_code;
    generate_output = res.output;
  }

  static CliDataset& instance() {
    static CliDataset ds;
    return ds;
  }
};

/// Ground-truth YOLO labels turned into perfect predictions (confidence 1).
void make_self_predictions(const fs::path& gt_dir, const fs::path& pred_dir) {
  fs::create_directories(pred_dir);
  for (const auto& entry : fs::directory_iterator(gt_dir)) {
    if (entry.path().extension() != ".txt") continue;
    std::istringstream in(read_text_file(entry.path()));
    std::string line, out;
    while (std::getline(in, line))
      if (!line.empty()) out += line + " 1.000000\n";
    write_text_file(pred_dir / entry.path().filename(), out);
  }
}

}  // namespace

TEST_CASE("cli: generate writes a complete dataset and reports stats") {
  CliDataset& ds = CliDataset::instance();
  REQUIRE(ds.generate_exit == 0);

  // The last stdout line is a JSON stats object.
  const size_t brace = ds.generate_output.rfind('{');
  REQUIRE(brace != std::string::npos);
  const auto stats = nlohmann::json::parse(ds.generate_output.substr(brace));
  CHECK(stats["frames"] == 4);
  CHECK(stats["out_dir"] == ds.out_dir.string());

  for (long index = 0; index < 4; ++index) {
    const std::string stem = DatasetLayout::stem(index);
    CHECK(fs::exists(ds.out_dir / "labels_kitti" / (stem + ".txt")));
    CHECK(fs::exists(ds.out_dir / "labels_yolo" / (stem + ".txt")));
    CHECK(fs::exists(ds.out_dir / "meta" / (stem + ".json")));
  }

  const auto manifest = nlohmann::json::parse(read_text_file(ds.out_dir / "manifest.json"));
  CHECK(manifest["complete"] == true);
  CHECK(manifest["frame_count"] == 4);
  CHECK(manifest["seed"] == 11);

  // The run must actually label something, or the suite below is vacuous.
  long boxes = 0;
  for (const auto& frame : manifest["frames"])
    boxes += frame["pedestrians"].get<long>() + frame["vehicles"].get<long>();
  CHECK(boxes > 0);
}

TEST_CASE("cli: regenerating into the same path is byte-identical") {
  CliDataset& ds = CliDataset::instance();
  REQUIRE(ds.generate_exit == 0);
  const auto before = testsupport::tree_fingerprint(ds.out_dir);

  const testsupport::CommandResult rerun = testsupport::run_command(
      testsupport::cli_path() + " generate --config " + ds.config_path.string() + " --out " +
      ds.out_dir.string());
  REQUIRE(rerun.exit_code == 0);

  const auto after = testsupport::tree_fingerprint(ds.out_dir);
  REQUIRE(before.size() == after.size());
  CHECK(before == after);
}

TEST_CASE("cli: generate overrides take effect and are recorded") {
  CliDataset& ds = CliDataset::instance();
  const fs::path out2 = ds.dir.path / "out-seeded";
  const testsupport::CommandResult res = testsupport::run_command(
      testsupport::cli_path() + " generate --config " + ds.config_path.string() +
      " --frames 2 --seed 99 --out " + out2.string());
  REQUIRE(res.exit_code == 0);

  const auto manifest = nlohmann::json::parse(read_text_file(out2 / "manifest.json"));
  CHECK(manifest["frame_count"] == 2);
  CHECK(manifest["seed"] == 99);
  CHECK(manifest["frames"].size() == 2u);
  CHECK_FALSE(fs::exists(out2 / "labels_kitti" / "000002.txt"));
}

TEST_CASE("cli: validation and I/O failures use distinct exit codes") {
  CliDataset& ds = CliDataset::instance();

  // Unknown key in the config: validation error, exit 2.
  const fs::path bad = ds.dir.path / "bad.json";
  write_text_file(bad, R"({"junk": true})");
  const auto res2 = testsupport::run_command(testsupport::cli_path() +
                                             " generate --config " + bad.string());
  CHECK(res2.exit_code == 2);
  CHECK(res2.output.find("error: config: unknown key 'junk'") != std::string::npos);

  // Missing config file: I/O error, exit 3.
  const auto res3 = testsupport::run_command(testsupport::cli_path() +
                                             " generate --config " +
                                             (ds.dir.path / "absent.json").string());
  CHECK(res3.exit_code == 3);
  CHECK(res3.output.find("error: cannot open for reading") != std::string::npos);

  // Bad command line: exit 2 via the argument parser.
  CHECK(testsupport::run_command(testsupport::cli_path() + " generate --bogus").exit_code ==
        2);
  CHECK(testsupport::run_command(testsupport::cli_path()).exit_code == 2);
  CHECK(testsupport::run_command(testsupport::cli_path() + " --help").exit_code == 0);
}

TEST_CASE("cli: eval scores ground truth against itself at exactly 100") {
  CliDataset& ds = CliDataset::instance();
  REQUIRE(ds.generate_exit == 0);

  const fs::path gt_dir = ds.out_dir / "labels_yolo";
  const fs::path pred_dir = ds.dir.path / "self-pred";
  make_self_predictions(gt_dir, pred_dir);

  const fs::path report_path = ds.dir.path / "report.json";
  const testsupport::CommandResult res = testsupport::run_command(
      testsupport::cli_path() + " eval --gt " + gt_dir.string() + " --pred " +
      pred_dir.string() + " --report " + report_path.string());
  REQUIRE(res.exit_code == 0);
  CHECK(res.output.find("mAP@0.5: 100.0") != std::string::npos);

  const auto report = nlohmann::json::parse(read_text_file(report_path));
  CHECK(report["map_percent"] == Approx(100.0).epsilon(1e-12));
  for (const auto& row : report["per_class"]) {
    CHECK(row["fp"] == 0);
    CHECK(row["fn"] == 0);
  }
}

TEST_CASE("cli: eval rejects bad inputs with the right exit codes") {
  CliDataset& ds = CliDataset::instance();
  const fs::path gt_dir = ds.out_dir / "labels_yolo";

  // Predictions naming a frame the ground truth lacks: validation, exit 2.
  const fs::path stray = ds.dir.path / "stray-pred";
  fs::create_directories(stray);
  write_text_file(stray / "999999.txt", "1 0.5 0.5 0.25 0.25 0.9\n");
  const auto res = testsupport::run_command(testsupport::cli_path() + " eval --gt " +
                                            gt_dir.string() + " --pred " + stray.string());
  CHECK(res.exit_code == 2);
  CHECK(res.output.find("absent from the ground truth: 999999") != std::string::npos);

  // Missing directory: I/O, exit 3.
  CHECK(testsupport::run_command(testsupport::cli_path() + " eval --gt " + gt_dir.string() +
                                 " --pred " + (ds.dir.path / "nowhere").string())
            .exit_code == 3);

  // Malformed resolution: validation, exit 2.
  CHECK(testsupport::run_command(testsupport::cli_path() + " eval --gt " + gt_dir.string() +
                                 " --pred " + stray.string() + " --res 4kx2k")
            .exit_code == 2);
}

TEST_CASE("cli: inspect summarizes datasets and single frames") {
  CliDataset& ds = CliDataset::instance();
  REQUIRE(ds.generate_exit == 0);

  const testsupport::CommandResult summary =
      testsupport::run_command(testsupport::cli_path() + " inspect " + ds.out_dir.string());
  REQUIRE(summary.exit_code == 0);
  CHECK(summary.output.find("frames: 4") != std::string::npos);
  CHECK(summary.output.find("complete: true") != std::string::npos);
  CHECK(summary.output.find("config_hash: fnv1a64:") != std::string::npos);
  CHECK(summary.output.find("weather:") != std::string::npos);

  const testsupport::CommandResult frame = testsupport::run_command(
      testsupport::cli_path() + " inspect " + ds.out_dir.string() + " --frame 3");
  REQUIRE(frame.exit_code == 0);
  CHECK(frame.output.find("frame 000003") != std::string::npos);
  CHECK(frame.output.find("bbox_amodal") != std::string::npos);

  // Out-of-range frame: validation, exit 2.
  const testsupport::CommandResult range = testsupport::run_command(
      testsupport::cli_path() + " inspect " + ds.out_dir.string() + " --frame 99");
  CHECK(range.exit_code == 2);
  CHECK(range.output.find("out of range [0, 4)") != std::string::npos);

  // No dataset at all: validation, exit 2 (the manifest is named).
  const testsupport::CommandResult missing = testsupport::run_command(
      testsupport::cli_path() + " inspect " + (ds.dir.path / "void").string());
  CHECK(missing.exit_code == 2);
  CHECK(missing.output.find("manifest not found") != std::string::npos);
}
