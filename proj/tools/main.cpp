#include "maxtab/pipeline.hpp"
#include "maxtab/table.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace {

using nlohmann::json;

struct CommonIo {
  std::string delimiter = ",";
  std::vector<std::string> missing = {"?", "NA", ""};
};

void add_io_options(CLI::App* cmd, CommonIo& io) {
  cmd->add_option("--delimiter", io.delimiter, "CSV field delimiter (one character)")
      ->check(CLI::Validator(
          [](std::string& s) {
            return s.size() == 1 ? std::string() : std::string("must be a single character");
          },
          "CHAR"));
  cmd->add_option("--missing", io.missing,
                  "values treated as missing (replaces the default list: '?', 'NA', empty)");
}

maxtab::IngestOptions ingest_of(const CommonIo& io) {
  maxtab::IngestOptions opts;
  opts.delimiter = io.delimiter[0];
  opts.missing_sentinels = io.missing;
  return opts;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

int run_fit(const std::string& input, const std::string& output_model, const std::string& order,
            const std::string& trace_path, maxtab::RunConfig config) {
  if (order == "2")
    config.order = maxtab::OrderPolicy::order2_only;
  else if (order == "4")
    config.order = maxtab::OrderPolicy::order4_only;
  else
    config.order = maxtab::OrderPolicy::automatic;

  maxtab::FittedModel model = maxtab::fit_csv(input, config);
  maxtab::save_model(model, output_model);
  if (!trace_path.empty()) write_file(trace_path, maxtab::trace_to_jsonl(model.trace));

  std::size_t kept = 0;
  json dropped = json::array();
  for (const auto& s : model.schemas) {
    if (s.dropped)
      dropped.push_back({{"column", s.name}, {"reason", s.drop_reason}});
    else
      ++kept;
  }
  json summary;
  summary["model"] = output_model;
  summary["kind"] = model.kind == maxtab::ModelKind::order4 ? "order4" : "order2";
  summary["columns_kept"] = kept;
  summary["columns_dropped"] = std::move(dropped);
  summary["epochs"] = model.trace.size();
  if (model.order2_score) summary["order2_score"] = *model.order2_score;
  if (model.order4_score) summary["order4_score"] = *model.order4_score;
  summary["warnings"] = model.warnings;
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int run_sample(const std::string& model_path, std::size_t rows, const std::string& output,
               std::uint64_t seed, const maxtab::SamplerConfig& sampler) {
  maxtab::FittedModel model = maxtab::load_model(model_path);
  maxtab::Table table = maxtab::sample(model, rows, seed, sampler);
  const auto survivors = maxtab::surviving_schemas(model.schemas);
  maxtab::write_csv(table, output, &survivors);
  if (table.n_rows() < rows)
    std::cerr << "warning: sign constraints kept rejecting rows; wrote " << table.n_rows()
              << " of " << rows << "\n";
  return 0;
}

int run_evaluate(const std::string& real_path, const std::string& synth_path,
                 const std::string& report_path, const std::string& markdown_path,
                 const maxtab::EvaluateOptions& options, const maxtab::IngestOptions& ingest) {
  maxtab::Table real = maxtab::load_csv(real_path, ingest);
  maxtab::Table synth = maxtab::load_csv(synth_path, ingest);
  maxtab::EvaluationReport report = maxtab::evaluate(real, synth, options);
  const std::string text = maxtab::report_to_json(report);
  if (report_path.empty())
    std::cout << text;
  else
    write_file(report_path, text);
  if (!markdown_path.empty()) write_file(markdown_path, maxtab::report_to_markdown(report));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"maxtab: maximum-entropy synthesizer for tabular data"};
  app.set_version_flag("--version", "maxtab 0.1.0");
  app.require_subcommand(1);

  // fit
  auto* fit = app.add_subcommand("fit", "fit a generative model to a CSV table");
  std::string fit_input, fit_output, fit_order = "auto", fit_trace;
  maxtab::RunConfig run;
  CommonIo fit_io;
  fit->add_option("--input", fit_input, "training CSV")->required()->check(CLI::ExistingFile);
  fit->add_option("--output-model", fit_output, "where to write the model json")->required();
  fit->add_option("--order", fit_order, "auto, 2 (closed form only) or 4 (trained only)")
      ->check(CLI::IsMember({"auto", "2", "4"}));
  fit->add_option("--budget", run.budget_seconds, "training wall-clock budget, seconds")
      ->check(CLI::PositiveNumber);
  fit->add_option("--window", run.window, "plateau window, epochs")->check(CLI::PositiveNumber);
  fit->add_option("--max-epochs", run.max_epochs, "hard epoch cap (0 = none)")
      ->check(CLI::NonNegativeNumber);
  fit->add_option("--mc-points", run.mc_points, "Monte Carlo points per epoch")
      ->check(CLI::PositiveNumber);
  fit->add_option("--chains", run.sampler.n_chains, "sampler chains (0 = hardware threads)")
      ->check(CLI::NonNegativeNumber);
  fit->add_option("--burn-in", run.sampler.burn_in, "sampler burn-in steps")
      ->check(CLI::NonNegativeNumber);
  fit->add_option("--thinning", run.sampler.thinning, "keep every k-th step")
      ->check(CLI::PositiveNumber);
  fit->add_option("--proposal-scale", run.sampler.proposal_scale, "proposal std dev factor")
      ->check(CLI::PositiveNumber);
  fit->add_option("--seed", run.seed, "random seed");
  fit->add_option("--eval-row-cap", run.eval_row_cap, "row cap for epoch scoring")
      ->check(CLI::PositiveNumber);
  fit->add_option("--pair-cap", run.max_pairs_per_epoch,
                  "column pairs scored per epoch (0 = all)")
      ->check(CLI::NonNegativeNumber);
  fit->add_option("--trace", fit_trace, "write the per-epoch training trace here (jsonl)");
  add_io_options(fit, fit_io);

  // sample
  auto* smp = app.add_subcommand("sample", "draw synthetic rows from a fitted model");
  std::string smp_model, smp_output;
  std::size_t smp_rows = 0;
  std::uint64_t smp_seed = 0;
  maxtab::SamplerConfig smp_sampler;
  smp->add_option("--model", smp_model, "model json from fit")->required()->check(CLI::ExistingFile);
  smp->add_option("--rows", smp_rows, "rows to draw")->required();
  smp->add_option("--output", smp_output, "output CSV")->required();
  smp->add_option("--seed", smp_seed, "random seed");
  smp->add_option("--chains", smp_sampler.n_chains, "sampler chains (0 = hardware threads)")
      ->check(CLI::NonNegativeNumber);
  smp->add_option("--burn-in", smp_sampler.burn_in, "sampler burn-in steps")
      ->check(CLI::NonNegativeNumber);
  smp->add_option("--thinning", smp_sampler.thinning, "keep every k-th step")
      ->check(CLI::PositiveNumber);
  smp->add_option("--proposal-scale", smp_sampler.proposal_scale, "proposal std dev factor")
      ->check(CLI::PositiveNumber);

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "score a synthetic table against the real one");
  std::string ev_real, ev_synth, ev_report, ev_markdown;
  maxtab::EvaluateOptions ev_options;
  CommonIo ev_io;
  ev->add_option("--real", ev_real, "real CSV")->required()->check(CLI::ExistingFile);
  ev->add_option("--synth", ev_synth, "synthetic CSV")->required()->check(CLI::ExistingFile);
  ev->add_option("--report", ev_report, "write the json report here (default: stdout)");
  ev->add_option("--markdown", ev_markdown, "also write a markdown report here");
  ev->add_flag("--indist", ev_options.indistinguishability,
               "run the half-split indistinguishability test");
  ev->add_flag("--dcr", ev_options.dcr, "run the distance-to-closest-record privacy check");
  ev->add_option("--seed", ev_options.seed, "random seed");
  ev->add_option("--splits", ev_options.n_splits, "half-splits for the reference band")
      ->check(CLI::PositiveNumber);
  ev->add_option("--row-cap", ev_options.row_cap, "row cap for similarity scoring")
      ->check(CLI::PositiveNumber);
  add_io_options(ev, ev_io);

  CLI11_PARSE(app, argc, argv);

  try {
    if (fit->parsed()) {
      run.ingest = ingest_of(fit_io);
      return run_fit(fit_input, fit_output, fit_order, fit_trace, run);
    }
    if (smp->parsed()) return run_sample(smp_model, smp_rows, smp_output, smp_seed, smp_sampler);
    return run_evaluate(ev_real, ev_synth, ev_report, ev_markdown, ev_options, ingest_of(ev_io));
  } catch (const std::exception& e) {
    json err;
    err["error"] = e.what();
    std::cerr << err.dump() << "\n";
    return 1;
  }
}
