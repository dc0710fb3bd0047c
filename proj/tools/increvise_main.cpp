#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include "CLI11.hpp"
#include "increvise/runner.hpp"
#include "increvise/trace.hpp"

namespace fs = std::filesystem;
using namespace increvise;

namespace {

#ifndef INCREVISE_DEFAULT_ASSETS
#define INCREVISE_DEFAULT_ASSETS "assets"
#endif

std::string assets_dir() {
  if (const char* env = std::getenv("INCREVISE_ASSETS")) return env;
  return INCREVISE_DEFAULT_ASSETS;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open `" + path + "`");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void spill(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write `" + path + "`");
  out << content;
}

struct CommonOpts {
  std::string scenario;
  std::string rules;
  std::string lexicon;
  std::string trace_path;
  std::string metrics_path;
  EngineConfig config;
  CLI::Option* lang_opt = nullptr;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_rules) {
  cmd->add_option("--scenario", opts.scenario, "scenario file (sweep also accepts a directory)")
      ->required();
  if (with_rules) {
    cmd->add_option("--rules", opts.rules, "rule file (default: <assets>/rules/core.drl)");
    cmd->add_option("--threshold", opts.config.threshold, "certainty threshold in [0,1]")
        ->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--time-limit", opts.config.time_limit, "delay before a rule may fire, ticks");
    cmd->add_option("--max-defaults", opts.config.max_defaults,
                    "cap on live assumptions per sentence")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--fluency", opts.config.fluency, "1 fires immediately, 0 waits the limit")
        ->check(CLI::Range(0.0, 1.0));
  }
  cmd->add_option("--lexicon", opts.lexicon, "lexicon file (default: <assets>/lexicon/<lang>.lex)");
  opts.lang_opt =
      cmd->add_option("--lang", opts.config.lang, "de or en")->check(CLI::IsMember({"de", "en"}));
  cmd->add_option("--trace", opts.trace_path, "write the run trace (JSON lines)");
  cmd->add_option("--metrics", opts.metrics_path, "write run metrics (JSON)");
}

std::string resolve_rules(const CommonOpts& opts) {
  if (!opts.rules.empty()) return opts.rules;
  return assets_dir() + "/rules/core.drl";
}

// Scenario files may pin their language with a `; lang: de` comment.
std::string detect_lang(const std::string& text, const std::string& fallback) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos) continue;
    if (line[start] != ';') break;
    size_t pos = line.find("lang:");
    if (pos == std::string::npos) continue;
    std::istringstream rest(line.substr(pos + 5));
    std::string lang;
    rest >> lang;
    if (lang == "de" || lang == "en") return lang;
  }
  return fallback;
}

std::string resolve_lexicon(const CommonOpts& opts) {
  if (!opts.lexicon.empty()) return opts.lexicon;
  return assets_dir() + "/lexicon/" + opts.config.lang + ".lex";
}

void write_outputs(const CommonOpts& opts, const RunArtifacts& run) {
  if (!opts.trace_path.empty()) spill(opts.trace_path, trace_to_jsonl(run.trace));
  if (!opts.metrics_path.empty()) spill(opts.metrics_path, metrics_to_json(run.metrics) + "\n");
}

int cmd_generate(CommonOpts opts) {
  std::string text = slurp(opts.scenario);
  if (opts.lang_opt && opts.lang_opt->count() == 0) {
    opts.config.lang = detect_lang(text, opts.config.lang);
  }
  Scenario scenario = parse_scenario(text);
  RuleRegistry rules = parse_rules(slurp(resolve_rules(opts)));
  Lexicon lexicon = load_lexicon(slurp(resolve_lexicon(opts)));
  RunArtifacts run = run_incremental(scenario, rules, lexicon, opts.config);
  write_outputs(opts, run);
  std::cout << run.transcript << "\n";
  return run.exit_code;
}

int cmd_batch(CommonOpts opts) {
  std::string text = slurp(opts.scenario);
  if (opts.lang_opt && opts.lang_opt->count() == 0) {
    opts.config.lang = detect_lang(text, opts.config.lang);
  }
  Scenario scenario = parse_scenario(text);
  Lexicon lexicon = load_lexicon(slurp(resolve_lexicon(opts)));
  RunArtifacts run = run_batch(scenario, lexicon, opts.config);
  write_outputs(opts, run);
  if (run.exit_code != 0) {
    std::cerr << run.error << "\n";
    return run.exit_code;
  }
  std::cout << run.transcript << "\n";
  return 0;
}

std::vector<std::string> scenario_files(const std::string& path) {
  std::vector<std::string> out;
  if (fs::is_directory(path)) {
    for (const auto& entry : fs::directory_iterator(path)) {
      if (entry.path().extension() == ".scn") out.push_back(entry.path().string());
    }
    std::sort(out.begin(), out.end());
  } else {
    out.push_back(path);
  }
  return out;
}

int cmd_sweep(const CommonOpts& opts, const std::vector<double>& thresholds,
              const std::vector<Tick>& time_limits, const std::string& out_path) {
  std::vector<double> th = thresholds;
  std::vector<Tick> tl = time_limits;
  if (th.empty() && tl.empty()) {
    std::cerr << "sweep: empty parameter range\n";
    return 1;
  }
  if (th.empty()) th.push_back(opts.config.threshold);
  if (tl.empty()) tl.push_back(opts.config.time_limit);

  std::vector<std::string> files = scenario_files(opts.scenario);
  if (files.empty()) {
    std::cerr << "sweep: no scenarios under `" + opts.scenario + "`\n";
    return 1;
  }
  RuleRegistry rules = parse_rules(slurp(resolve_rules(opts)));
  std::map<std::string, Lexicon> lexicons;
  auto lexicon_for = [&](const std::string& lang) -> const Lexicon& {
    auto it = lexicons.find(lang);
    if (it != lexicons.end()) return it->second;
    std::string path = opts.lexicon;
    if (path.empty()) path = assets_dir() + "/lexicon/" + lang + ".lex";
    return lexicons.emplace(lang, load_lexicon(slurp(path))).first->second;
  };

  std::ostringstream tsv;
  tsv << "threshold\tmean_delay\trepairs\tretracted_tokens\tglobal_certainty\n";
  for (Tick limit : tl) {
    for (double threshold : th) {
      EngineConfig config = opts.config;
      config.threshold = threshold;
      config.time_limit = limit;
      long long delay_sum = 0;
      long long delay_count = 0;
      int repairs = 0;
      int retracted = 0;
      double certainty_sum = 0.0;
      for (const std::string& file : files) {
        std::string text = slurp(file);
        Scenario scenario = parse_scenario(text);
        EngineConfig run_config = config;
        run_config.lang = detect_lang(text, config.lang);
        RunArtifacts run = run_incremental(scenario, rules, lexicon_for(run_config.lang),
                                           run_config);
        if (run.exit_code == 1) return 1;
        for (const auto& e : run.trace) {
          if (e.type == "token" && !e.retracted && e.lic >= 0) {
            delay_sum += (e.t - e.lic);
            delay_count++;
          }
        }
        repairs += run.metrics.repair_count;
        retracted += run.metrics.retracted_token_count;
        certainty_sum += run.metrics.final_global_certainty;
      }
      double mean_delay = delay_count ? static_cast<double>(delay_sum) / delay_count : 0.0;
      double mean_certainty = certainty_sum / static_cast<double>(files.size());
      tsv << threshold << "\t" << mean_delay << "\t" << repairs << "\t" << retracted << "\t"
          << mean_certainty << "\n";
    }
  }
  if (out_path.empty()) {
    std::cout << tsv.str();
  } else {
    spill(out_path, tsv.str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"incremental sentence generation with certainty-gated assumptions"};
  app.require_subcommand(1);

  CommonOpts gen_opts, batch_opts, sweep_opts;
  std::vector<double> sweep_thresholds;
  std::vector<Tick> sweep_limits;
  std::string sweep_out;

  CLI::App* gen = app.add_subcommand("generate", "incremental run over a timed scenario");
  add_common(gen, gen_opts, true);

  CLI::App* batch = app.add_subcommand("batch", "consume everything at t=0; the content oracle");
  add_common(batch, batch_opts, false);

  CLI::App* sweep = app.add_subcommand("sweep", "grid of runs; TSV summary per parameter point");
  add_common(sweep, sweep_opts, true);
  sweep->add_option("--sweep-threshold", sweep_thresholds, "threshold values")->delimiter(',');
  sweep->add_option("--sweep-time-limit", sweep_limits, "time-limit values")->delimiter(',');
  sweep->add_option("--out", sweep_out, "write the TSV here instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_generate(gen_opts);
    if (batch->parsed()) return cmd_batch(batch_opts);
    if (sweep->parsed()) return cmd_sweep(sweep_opts, sweep_thresholds, sweep_limits, sweep_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
