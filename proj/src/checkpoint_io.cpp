#include "ranloop/checkpoint_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

namespace ranloop {

namespace {

std::string fmt(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

class LineParser {
 public:
  LineParser(std::string text, std::string path)
      : in_(std::move(text)), path_(std::move(path)) {}

  /// Next non-empty line; throws on EOF when required.
  std::vector<std::string> next(const std::string& expect_tag) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (line.empty()) continue;
      std::istringstream ls(line);
      std::vector<std::string> tokens;
      std::string token;
      while (ls >> token) tokens.push_back(token);
      if (tokens.empty()) continue;
      if (!expect_tag.empty() && tokens[0] != expect_tag) {
        fail("expected '" + expect_tag + "', found '" + tokens[0] + "'");
      }
      return tokens;
    }
    fail(expect_tag.empty() ? "unexpected end of file (truncated)"
                            : "unexpected end of file (truncated), wanted '" + expect_tag + "'");
    return {};
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw CheckpointIoError("corrupt checkpoint file " + path_ + " at line " +
                            std::to_string(line_no_) + ": " + message);
  }

  double number(const std::vector<std::string>& tokens, std::size_t i) const {
    if (i >= tokens.size()) fail("missing numeric field");
    double out{};
    const auto& t = tokens[i];
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
    if (ec != std::errc{} || ptr != t.data() + t.size()) fail("bad number: '" + t + "'");
    return out;
  }

  template <typename Int>
  Int integer(const std::vector<std::string>& tokens, std::size_t i) const {
    if (i >= tokens.size()) fail("missing integer field");
    Int out{};
    const auto& t = tokens[i];
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
    if (ec != std::errc{} || ptr != t.data() + t.size()) fail("bad integer: '" + t + "'");
    return out;
  }

  int line_no() const { return line_no_; }

 private:
  std::istringstream in_;
  std::string path_;
  int line_no_{0};
};

void write_doubles(std::ostream& out, const std::vector<double>& values) {
  out << values.size();
  for (double v : values) out << " " << fmt(v);
  out << "\n";
}

std::vector<double> read_doubles(LineParser& parser, const std::string& tag) {
  const auto tokens = parser.next(tag);
  const auto n = parser.integer<std::size_t>(tokens, 1);
  if (tokens.size() != n + 2) parser.fail("wrong vector length for '" + tag + "'");
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = parser.number(tokens, i + 2);
  return out;
}

}  // namespace

void save_checkpoint_file(const std::filesystem::path& path, const CheckpointFile& data) {
  std::ostringstream out;
  out << "ranloop-checkpoint " << kCheckpointFormatVersion << "\n";

  const PersistedAgentState& a = data.agent;
  out << "agent.kind " << to_string(a.kind) << "\n";
  out << "agent.epsilon " << fmt(a.epsilon) << "\n";
  out << "agent.learn_steps " << a.learn_steps << "\n";
  out << "qlearn.config " << fmt(a.qlearn.alpha) << " " << fmt(a.qlearn.gamma) << " "
      << fmt(a.qlearn.epsilon_initial) << " " << fmt(a.qlearn.epsilon_final) << " "
      << a.qlearn.anneal_steps << "\n";
  out << "qtable.size " << a.qtable.entries().size() << "\n";
  for (const auto& [key, value] : a.qtable.entries()) {
    out << "q " << key << " " << fmt(value) << "\n";
  }
  out << "ac.theta ";
  write_doubles(out, a.ac.theta);
  out << "ac.w ";
  write_doubles(out, a.ac.w);
  out << "ac.config " << fmt(a.ac.sigma) << " " << fmt(a.ac.alpha_actor) << " "
      << fmt(a.ac.alpha_critic) << " " << fmt(a.ac.gamma) << "\n";
  out << "rng.seed " << a.rng.seed() << "\n";
  out << "rng.draws";
  for (std::size_t s = 0; s < kRngStreamCount; ++s) {
    out << " " << a.rng.draw_count(static_cast<RngStream>(s));
  }
  out << "\n";

  const PersistedSupervisorState& sup = data.supervisor;
  out << "sup.next_id " << sup.next_checkpoint_id << "\n";
  out << "sup.ewma " << fmt(sup.reward_ewma) << " " << (sup.ewma_initialized ? 1 : 0) << "\n";
  out << "sup.history ";
  write_doubles(out, sup.reward_history);
  out << "sup.checkpoints " << sup.checkpoints.size() << "\n";
  for (const auto& cp : sup.checkpoints) {
    out << "checkpoint " << cp.id << " " << cp.tti << " " << fmt(cp.baseline_reward) << " "
        << cp.configs.size() << "\n";
    for (const auto& c : cp.configs) {
      out << "cellcfg " << c.cell_id << " " << fmt(c.position.x) << " " << fmt(c.position.y)
          << " " << fmt(c.tx_power_dbm) << " " << fmt(c.antenna_gain_dbi) << " " << c.n_prb
          << " " << c.subband_mask << " " << (c.active ? 1 : 0) << " " << fmt(c.idle_power_w)
          << " " << fmt(c.per_prb_tx_energy_w) << "\n";
    }
  }
  out << "end\n";

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw std::ios_base::failure("cannot open checkpoint file: " + path.string());
  file << out.str();
  if (!file) throw std::ios_base::failure("write failed: " + path.string());
}

CheckpointFile load_checkpoint_file(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw std::ios_base::failure("cannot open checkpoint file: " + path.string());
  std::ostringstream buf;
  buf << file.rdbuf();

  LineParser parser(buf.str(), path.string());
  CheckpointFile data;

  const auto header = parser.next("ranloop-checkpoint");
  const auto version = parser.integer<int>(header, 1);
  if (version != kCheckpointFormatVersion) {
    throw CheckpointIoError("checkpoint version mismatch: file has version " +
                            std::to_string(version) + ", this build supports version " +
                            std::to_string(kCheckpointFormatVersion));
  }

  PersistedAgentState& a = data.agent;
  {
    const auto tokens = parser.next("agent.kind");
    if (tokens.size() != 2) parser.fail("agent.kind needs one value");
    a.kind = agent_kind_from_string(tokens[1]);
  }
  a.epsilon = parser.number(parser.next("agent.epsilon"), 1);
  a.learn_steps = parser.integer<int64_t>(parser.next("agent.learn_steps"), 1);
  {
    const auto tokens = parser.next("qlearn.config");
    a.qlearn.alpha = parser.number(tokens, 1);
    a.qlearn.gamma = parser.number(tokens, 2);
    a.qlearn.epsilon_initial = parser.number(tokens, 3);
    a.qlearn.epsilon_final = parser.number(tokens, 4);
    a.qlearn.anneal_steps = parser.integer<int64_t>(tokens, 5);
  }
  const auto table_size = parser.integer<std::size_t>(parser.next("qtable.size"), 1);
  for (std::size_t i = 0; i < table_size; ++i) {
    const auto tokens = parser.next("q");
    const auto key = parser.integer<uint64_t>(tokens, 1);
    a.qtable.entries_mutable()[key] = parser.number(tokens, 2);
  }
  a.ac.theta = read_doubles(parser, "ac.theta");
  a.ac.w = read_doubles(parser, "ac.w");
  {
    const auto tokens = parser.next("ac.config");
    a.ac.sigma = parser.number(tokens, 1);
    a.ac.alpha_actor = parser.number(tokens, 2);
    a.ac.alpha_critic = parser.number(tokens, 3);
    a.ac.gamma = parser.number(tokens, 4);
  }
  {
    const auto seed = parser.integer<uint64_t>(parser.next("rng.seed"), 1);
    a.rng = DeterministicRng(seed);
    const auto draws = parser.next("rng.draws");
    if (draws.size() != kRngStreamCount + 1) parser.fail("rng.draws needs one count per stream");
    for (std::size_t s = 0; s < kRngStreamCount; ++s) {
      a.rng.set_draw_count(static_cast<RngStream>(s), parser.integer<uint64_t>(draws, s + 1));
    }
  }

  PersistedSupervisorState& sup = data.supervisor;
  sup.next_checkpoint_id = parser.integer<uint64_t>(parser.next("sup.next_id"), 1);
  {
    const auto tokens = parser.next("sup.ewma");
    sup.reward_ewma = parser.number(tokens, 1);
    sup.ewma_initialized = parser.integer<int>(tokens, 2) != 0;
  }
  sup.reward_history = read_doubles(parser, "sup.history");
  const auto n_checkpoints = parser.integer<std::size_t>(parser.next("sup.checkpoints"), 1);
  for (std::size_t i = 0; i < n_checkpoints; ++i) {
    const auto tokens = parser.next("checkpoint");
    Checkpoint cp;
    cp.id = parser.integer<uint64_t>(tokens, 1);
    cp.tti = parser.integer<int64_t>(tokens, 2);
    cp.baseline_reward = parser.number(tokens, 3);
    const auto n_cells = parser.integer<std::size_t>(tokens, 4);
    for (std::size_t c = 0; c < n_cells; ++c) {
      const auto cell_tokens = parser.next("cellcfg");
      CellConfig config;
      config.cell_id = parser.integer<int>(cell_tokens, 1);
      config.position.x = parser.number(cell_tokens, 2);
      config.position.y = parser.number(cell_tokens, 3);
      config.tx_power_dbm = parser.number(cell_tokens, 4);
      config.antenna_gain_dbi = parser.number(cell_tokens, 5);
      config.n_prb = parser.integer<int>(cell_tokens, 6);
      config.subband_mask = parser.integer<uint32_t>(cell_tokens, 7);
      config.active = parser.integer<int>(cell_tokens, 8) != 0;
      config.idle_power_w = parser.number(cell_tokens, 9);
      config.per_prb_tx_energy_w = parser.number(cell_tokens, 10);
      cp.configs.push_back(config);
    }
    sup.checkpoints.push_back(std::move(cp));
  }
  parser.next("end");
  return data;
}

}  // namespace ranloop
