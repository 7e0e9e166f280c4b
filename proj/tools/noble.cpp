#include "noble/config.hpp"
#include "noble/dataset.hpp"
#include "noble/error.hpp"
#include "noble/grid.hpp"
#include "noble/imu_model.hpp"
#include "noble/io_util.hpp"
#include "noble/manifold.hpp"
#include "noble/metrics.hpp"
#include "noble/synth.hpp"
#include "noble/theory.hpp"
#include "noble/wifi_model.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace noble;
namespace fs = std::filesystem;

struct IngestArgs {
  std::string dataset;
  std::string input;
  std::string output;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

OccupancyMask mask_from(const Config& config) {
  const std::string preset = config.get_string("preset", "courtyard");
  const double cell = config.get_double("mask_cell_m", 1.0);
  if (preset == "courtyard") return courtyard_mask(cell);
  if (preset == "ring") return ring_corridor_mask(cell);
  throw ConfigError("preset must be courtyard or ring, got '" + preset + "'");
}

void run_ingest(const IngestArgs& args) {
  if (args.dataset == "ujiindoorloc") {
    // --in names a directory holding trainingData.csv (+ optionally
    // validationData.csv) or a single training CSV. Without a validation
    // file the test split is carved from the training rows.
    std::string train_path = args.input;
    std::string test_path;
    if (fs::is_directory(args.input)) {
      train_path = (fs::path(args.input) / "trainingData.csv").string();
      const fs::path validation = fs::path(args.input) / "validationData.csv";
      if (fs::exists(validation)) test_path = validation.string();
    }
    save_wifi_corpus(load_ujiindoorloc(train_path, test_path, args.seed),
                     args.output);
  } else if (args.dataset == "ipin2016") {
    save_wifi_corpus(load_ipin2016(args.input, args.seed), args.output);
  } else if (args.dataset == "synthetic-wifi") {
    const Config config = Config::load(args.input);
    WifiSynthSpec spec;
    spec.mask = mask_from(config);
    spec.n_samples = config.get_int("n_samples", spec.n_samples);
    spec.noise_dbm = config.get_double("noise_dbm", spec.noise_dbm);
    spec.p0_dbm = config.get_double("p0_dbm", spec.p0_dbm);
    spec.path_loss_exponent =
        config.get_double("gamma", spec.path_loss_exponent);
    spec.dropout_dbm = config.get_double("dropout_dbm", spec.dropout_dbm);
    spec.test_fraction = config.get_double("test_fraction", spec.test_fraction);
    spec.seed = args.seed_set ? args.seed : config.get_seed("seed", spec.seed);
    spec.access_points =
        grid_access_points(spec.mask, config.get_int("ap_grid_nx", 6),
                           config.get_int("ap_grid_ny", 4));
    save_wifi_corpus(synth_wifi(spec), args.output);
  } else if (args.dataset == "synthetic-imu") {
    const Config config = Config::load(args.input);
    ImuSynthSpec spec;
    spec.mask = mask_from(config);
    spec.walk_steps = config.get_int("walk_steps", spec.walk_steps);
    spec.readings_per_gap =
        config.get_int("readings_per_gap", spec.readings_per_gap);
    spec.speed_mps = config.get_double("speed_mps", spec.speed_mps);
    spec.accel_noise = config.get_double("accel_noise", spec.accel_noise);
    spec.gyro_noise = config.get_double("gyro_noise", spec.gyro_noise);
    spec.max_len = config.get_int("max_len", spec.max_len);
    spec.count = config.get_int("count", spec.count);
    spec.seed = args.seed_set ? args.seed : config.get_seed("seed", spec.seed);
    save_imu_corpus(synth_imu(spec), args.output);
  } else {
    throw ConfigError("unknown dataset '" + args.dataset + "'");
  }
  std::cout << "wrote corpus to " << args.output << "\n";
}

std::map<std::string, std::string> echo_config(const Config& config) {
  std::map<std::string, std::string> echo;
  for (const auto& [k, v] : config.values()) echo[k] = v;
  return echo;
}

void run_train(const std::string& task, const std::string& data_dir,
               const std::string& config_path, const std::string& out_dir) {
  const Config config = Config::load(config_path);
  const TrainConfig tc = train_config_from(config);
  fs::create_directories(out_dir);

  if (task == "wifi") {
    const WifiCorpus corpus = ensure_normalized(load_wifi_corpus(data_dir));
    const double tau = config.get_double("tau", 0.2);
    const double coarse = config.get_double("coarse", 5.0 * tau);
    const std::optional<double> coarse_side =
        coarse > 0.0 ? std::optional<double>(coarse) : std::nullopt;
    WifiHeadOptions heads;
    heads.building = config.get_bool("head_building", true);
    heads.floor = config.get_bool("head_floor", true);
    heads.space = config.get_bool("head_space", false);
    WifiModel model =
        build_wifi_model(corpus, tau, coarse_side,
                         config.get_bool("adjacency", true), tc.seed, heads);
    train_wifi(model, corpus, tc);
    save_wifi_model(model, out_dir);
  } else if (task == "imu") {
    const ImuCorpus corpus = load_imu_corpus(data_dir);
    const ImuTask kind = config.get_string("task", "classify") == "regress"
                             ? ImuTask::regress
                             : ImuTask::classify;
    ImuModel model = build_imu_model(
        corpus, config.get_double("tau", 0.4), tc.seed, kind,
        config.get_int("projection_dim", 32), config.get_int("max_segments", 50));
    train_imu(model, corpus, tc, config.get_double("aux_weight", 0.1));
    save_imu_model(model, out_dir);
  } else {
    throw ConfigError("task must be wifi or imu");
  }
  atomic_write_file(out_dir + "/train_config.ini", config.serialize());
  std::cout << "wrote model to " << out_dir << "\n";
}

void run_eval(const std::string& task, const std::string& model_dir,
              const std::string& data_dir, const std::string& out_dir,
              bool emit_scatter_files) {
  fs::create_directories(out_dir);
  std::map<std::string, std::string> echo;
  const std::string train_config = model_dir + "/train_config.ini";
  if (fs::exists(train_config))
    echo = echo_config(Config::load(train_config));

  if (task == "wifi") {
    const WifiModel model = load_wifi_model(model_dir);
    const WifiCorpus corpus = ensure_normalized(load_wifi_corpus(data_dir));
    const MetricsReport report = evaluate_wifi(model, corpus.test, echo);
    save_metrics(report, out_dir + "/metrics.json");
    if (emit_scatter_files) {
      const std::vector<WifiPrediction> preds =
          predict_wifi_batch(model, corpus.test);
      std::vector<std::pair<Point2, Point2>> pairs;
      pairs.reserve(preds.size());
      for (std::size_t i = 0; i < preds.size(); ++i)
        pairs.emplace_back(corpus.test[i].position, preds[i].position);
      emit_scatter(pairs, out_dir + "/scatter.csv");
    }
  } else if (task == "imu") {
    const ImuModel model = load_imu_model(model_dir);
    const ImuCorpus corpus = load_imu_corpus(data_dir);
    const MetricsReport report =
        evaluate_imu(model, corpus, corpus.test_idx, echo);
    save_metrics(report, out_dir + "/metrics.json");
    if (emit_scatter_files) {
      std::vector<std::pair<Point2, Point2>> pairs;
      pairs.reserve(corpus.test_idx.size());
      for (std::size_t idx : corpus.test_idx)
        pairs.emplace_back(corpus.paths[idx].end_position,
                           predict_end_position(model, corpus, idx));
      emit_scatter(pairs, out_dir + "/scatter.csv");
    }
  } else {
    throw ConfigError("task must be wifi or imu");
  }
  std::cout << "wrote report to " << out_dir << "\n";
}

void run_baseline(const std::string& method, const std::string& data_dir,
                  const std::string& config_path, const std::string& out_dir) {
  const Config config = Config::load(config_path);
  const TrainConfig tc = train_config_from(config);
  fs::create_directories(out_dir);

  const WifiCorpus corpus = ensure_normalized(load_wifi_corpus(data_dir));
  const double tau = config.get_double("tau", 0.2);
  const std::vector<Point2> train_points = positions_of(corpus.train);
  const CellMap map =
      build_cell_map(GridSpec::fit(train_points, tau), train_points);

  MetricsReport report;
  if (method == "regression" || method == "projection") {
    const RegressionBaseline baseline = deep_regression(corpus, tc, tau, map);
    report = method == "regression"
                 ? baseline.report
                 : regression_projection(baseline.test_predictions,
                                         positions_of(corpus.test), map,
                                         echo_config(config));
    if (method == "regression") {
      std::vector<std::pair<Point2, Point2>> pairs;
      for (std::size_t i = 0; i < baseline.test_predictions.size(); ++i)
        pairs.emplace_back(corpus.test[i].position,
                           baseline.test_predictions[i]);
      emit_scatter(pairs, out_dir + "/scatter.csv");
    }
  } else if (method == "isomap" || method == "lle") {
    const EmbeddingMethod kind =
        method == "isomap" ? EmbeddingMethod::isomap : EmbeddingMethod::lle;
    const EmbeddingBaseline baseline = embedding_regression(
        corpus, kind, config.get_int("k", 12), config.get_int("s", 50), tc,
        map, static_cast<std::size_t>(config.get_int("landmark_cap", 1000)));
    report = baseline.report;

    std::ostringstream embedding_csv;
    const Matrix& e = baseline.embedding.embedding;
    for (Eigen::Index r = 0; r < e.rows(); ++r) {
      for (Eigen::Index c = 0; c < e.cols(); ++c) {
        if (c > 0) embedding_csv << ',';
        embedding_csv << format_double(e(r, c));
      }
      embedding_csv << '\n';
    }
    atomic_write_file(out_dir + "/embedding.csv", embedding_csv.str());
  } else {
    throw ConfigError("method must be regression, projection, isomap or lle");
  }
  for (const auto& [k, v] : echo_config(config)) report.config.emplace(k, v);
  save_metrics(report, out_dir + "/metrics.json");
  std::cout << "wrote report to " << out_dir << "\n";
}

void run_check_theory(const std::string& model_dir, const std::string& data_dir,
                      double lambda, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const WifiModel model = load_wifi_model(model_dir);
  const WifiCorpus corpus = ensure_normalized(load_wifi_corpus(data_dir));
  const Matrix inputs = rssi_matrix(corpus.test.empty() ? corpus.train
                                                        : corpus.test);
  const double sweep = sigmoid_rewrite_sweep(10000, 2, 64, 1);
  const PropositionReport proposition =
      proposition_check(model.net, inputs, lambda);
  atomic_write_file(out_dir + "/theory_report.json",
                    theory_report_json(sweep, 10000, proposition));
  std::cout << "wrote theory report to " << out_dir << "\n";
}

void run_quantize(const std::string& data_dir, double tau,
                  double coarse, const std::string& out_path) {
  const auto meta_path = data_dir + "/meta.json";
  std::vector<Point2> points;
  const std::string meta = read_file(meta_path);
  if (meta.find("\"wifi\"") != std::string::npos) {
    points = positions_of(load_wifi_corpus(data_dir).train);
  } else {
    const ImuCorpus corpus = load_imu_corpus(data_dir);
    for (std::size_t idx : corpus.train_idx)
      points.push_back(corpus.paths[idx].end_position);
  }
  const std::optional<double> coarse_side =
      coarse > 0.0 ? std::optional<double>(coarse) : std::nullopt;
  const CellMap map =
      build_cell_map(GridSpec::fit(points, tau, coarse_side), points);
  save_cell_map(map, out_path);
  std::cout << "K_fine=" << map.k_fine();
  if (map.has_coarse()) std::cout << " K_coarse=" << map.k_coarse();
  std::cout << " occupancy=" << points.size() << " samples over "
            << map.k_fine() << " cells\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structure-aware localization: quantized multi-label "
               "positioning and its baselines"};
  app.require_subcommand(1);

  IngestArgs ingest_args;
  CLI::App* ingest = app.add_subcommand("ingest", "Prepare a corpus directory");
  ingest->add_option("--dataset", ingest_args.dataset,
                     "ujiindoorloc | ipin2016 | synthetic-wifi | synthetic-imu")
      ->required();
  ingest->add_option("--in", ingest_args.input, "Source file/dir or generator config")
      ->required();
  ingest->add_option("--out", ingest_args.output, "Corpus directory")->required();
  ingest->add_option("--seed", ingest_args.seed, "Seed override");

  std::string train_task, train_data, train_config, train_out;
  CLI::App* train_cmd = app.add_subcommand("train", "Train a model");
  train_cmd->add_option("--task", train_task, "wifi | imu")->required();
  train_cmd->add_option("--data", train_data, "Corpus directory")->required();
  train_cmd->add_option("--config", train_config, "Experiment config")->required();
  train_cmd->add_option("--out", train_out, "Model directory")->required();

  std::string eval_task, eval_model, eval_data, eval_out;
  bool eval_scatter = false;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Evaluate a trained model");
  eval_cmd->add_option("--task", eval_task, "wifi | imu")->required();
  eval_cmd->add_option("--model", eval_model, "Model directory")->required();
  eval_cmd->add_option("--data", eval_data, "Corpus directory")->required();
  eval_cmd->add_option("--out", eval_out, "Report directory")->required();
  eval_cmd->add_flag("--emit-scatter", eval_scatter,
                     "Also write scatter.csv and scatter.svg");

  std::string base_method, base_data, base_config, base_out;
  CLI::App* baseline_cmd =
      app.add_subcommand("baseline", "Run a comparison model");
  baseline_cmd->add_option("--method", base_method,
                           "regression | projection | isomap | lle")
      ->required();
  baseline_cmd->add_option("--data", base_data, "Corpus directory")->required();
  baseline_cmd->add_option("--config", base_config, "Experiment config")->required();
  baseline_cmd->add_option("--out", base_out, "Report directory")->required();

  std::string theory_model, theory_data, theory_out;
  double theory_lambda = 0.5;
  CLI::App* theory_cmd =
      app.add_subcommand("check-theory", "Embedding-closeness checks");
  theory_cmd->add_option("--model", theory_model, "Model directory")->required();
  theory_cmd->add_option("--data", theory_data, "Corpus directory")->required();
  theory_cmd->add_option("--lambda", theory_lambda, "Qualifying-pair bound")
      ->required();
  theory_cmd->add_option("--out", theory_out, "Report directory")->required();

  std::string quant_data, quant_out;
  double quant_tau = 0.2, quant_coarse = 0.0;
  CLI::App* quant_cmd =
      app.add_subcommand("quantize", "Inspect cell occupancy at a given tau");
  quant_cmd->add_option("--data", quant_data, "Corpus directory")->required();
  quant_cmd->add_option("--tau", quant_tau, "Fine cell side, meters")->required();
  quant_cmd->add_option("--coarse", quant_coarse, "Coarse cell side, meters");
  quant_cmd->add_option("--out", quant_out, "Cell map file")->required();

  try {
    app.parse(argc, argv);
    ingest_args.seed_set = ingest->count("--seed") > 0;
    if (*ingest) run_ingest(ingest_args);
    if (*train_cmd) run_train(train_task, train_data, train_config, train_out);
    if (*eval_cmd)
      run_eval(eval_task, eval_model, eval_data, eval_out, eval_scatter);
    if (*baseline_cmd)
      run_baseline(base_method, base_data, base_config, base_out);
    if (*theory_cmd)
      run_check_theory(theory_model, theory_data, theory_lambda, theory_out);
    if (*quant_cmd) run_quantize(quant_data, quant_tau, quant_coarse, quant_out);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const MissingFile& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
