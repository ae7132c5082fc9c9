#include "sctl/harness/run_io.hpp"

#include <sstream>

#include "sctl/text.hpp"

namespace sctl {

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create directory " + dir.string() + ": " + ec.message());
}

std::ofstream open_output(const fs::path& path, bool binary) {
  std::ofstream os(path, binary ? std::ios::binary : std::ios::out);
  if (!os) throw InputError("cannot write " + path.string());
  return os;
}

std::ifstream open_input(const fs::path& path, bool binary) {
  std::ifstream is(path, binary ? std::ios::binary : std::ios::in);
  if (!is) throw InputError("cannot read " + path.string() + " (missing checkpoint or run directory?)");
  return is;
}

void write_text_file(const fs::path& path, const std::string& text) {
  auto os = open_output(path);
  os << text;
}

std::map<std::string, std::string> read_key_values(const fs::path& path) {
  auto is = open_input(path);
  std::map<std::string, std::string> out;
  std::string line;
  while (std::getline(is, line)) {
    const auto hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line.erase(hash_pos);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string{};
      return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
    };
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

namespace {

std::string adam_text(const AdamState<double>& a) {
  return std::to_string(a.step) + ' ' + format_exact(a.m(0)) + ' ' + format_exact(a.v(0)) + ' ' +
         format_exact(a.lr);
}

AdamState<double> parse_adam(const std::string& text) {
  std::istringstream is(text);
  AdamState<double> a(1, 3e-4);
  std::string step, m, v, lr;
  if (!(is >> step >> m >> v >> lr)) throw InputError("agent sidecar: malformed optimizer entry");
  a.step = std::stoll(step);
  a.m(0) = std::stod(m);
  a.v(0) = std::stod(v);
  a.lr = std::stod(lr);
  return a;
}

double parse_log(const std::string& s) { return s == "-inf" ? -std::numeric_limits<double>::infinity() : std::stod(s); }

}  // namespace

void write_agent_sidecar(const fs::path& path, const AgentSidecar& side) {
  std::ostringstream os;
  os << "config_hash = " << side.config_hash << '\n';
  os << "precision = " << side.precision << '\n';
  os << "updates = " << side.updates << '\n';
  os << "beta = " << format_exact(std::exp(side.log_beta)) << '\n';
  os << "lambda = " << format_exact(std::exp(side.log_lambda)) << '\n';
  os << "log_beta = " << format_exact(side.log_beta) << '\n';
  os << "log_lambda = " << format_exact(side.log_lambda) << '\n';
  os << "beta_adam = " << adam_text(side.beta_opt) << "  # step m v lr\n";
  os << "lambda_adam = " << adam_text(side.lambda_opt) << "  # step m v lr\n";
  write_text_file(path, os.str());
}

AgentSidecar read_agent_sidecar(const fs::path& path) {
  const auto kv = read_key_values(path);
  auto get = [&](const std::string& k) {
    const auto it = kv.find(k);
    if (it == kv.end()) throw InputError("agent sidecar: missing '" + k + "'");
    return it->second;
  };
  AgentSidecar side;
  side.config_hash = get("config_hash");
  side.precision = get("precision");
  side.updates = std::stoll(get("updates"));
  side.log_beta = parse_log(get("log_beta"));
  side.log_lambda = parse_log(get("log_lambda"));
  side.beta_opt = parse_adam(get("beta_adam"));
  side.lambda_opt = parse_adam(get("lambda_adam"));
  return side;
}

RawPolicy load_policy(const fs::path& dir) {
  const RunConfig cfg = RunConfig::from_file((dir / run_files::kConfig).string());
  if (cfg.precision == Precision::Float32) return deterministic_policy(load_actor<float>(dir));
  return deterministic_policy(load_actor<double>(dir));
}

namespace {

template <typename Scalar>
TrainedRun train_in(const RunConfig& cfg, const TrainOptions& options, const fs::path* save_dir) {
  auto out = train<Scalar>(cfg, options);
  if (save_dir != nullptr) {
    save_agent(*save_dir, out.agent, cfg);
    write_text_file(*save_dir / run_files::kConfig, cfg.to_text());
    {
      auto os = open_output(*save_dir / run_files::kLqr);
      write_lqr_record(os, out.lqr);
    }
    auto os = open_output(*save_dir / run_files::kTraining);
    write_training_csv(os, out.episodes);
  }
  TrainedRun run;
  run.lqr = out.lqr;
  run.episodes = std::move(out.episodes);
  run.policy = deterministic_policy(out.agent.actor());
  run.stored = out.stored;
  run.failed = out.failed;
  return run;
}

}  // namespace

TrainedRun train_run(const RunConfig& cfg, const TrainOptions& options, const fs::path* save_dir) {
  if (cfg.precision == Precision::Float32) return train_in<float>(cfg, options, save_dir);
  return train_in<double>(cfg, options, save_dir);
}

}  // namespace sctl
