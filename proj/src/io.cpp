#include "hcls/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "hcls/errors.hpp"

namespace hcls {
namespace {

using nlohmann::json;

constexpr char kCheckpointMagic[8] = {'H', 'C', 'L', 'S', 'V', 'I', '0', '1'};

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream f(path, mode);
  if (!f) throw DataError("cannot open " + path.string() + " for writing");
  return f;
}

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream f(path, mode);
  if (!f) throw DataError("cannot open " + path.string());
  return f;
}

void put_u64(std::ostream& out, std::uint64_t v) {
  char bytes[8];
  for (int k = 0; k < 8; ++k) bytes[k] = static_cast<char>((v >> (8 * k)) & 0xff);
  out.write(bytes, 8);
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8)) throw DataError("checkpoint: truncated file");
  std::uint64_t v = 0;
  for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(bytes[k]) << (8 * k);
  return v;
}

void put_f64(std::ostream& out, double x) { put_u64(out, std::bit_cast<std::uint64_t>(x)); }
double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

std::optional<long long> parse_integer(std::string_view s) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

json positions_json(const LatentConfiguration& c) {
  json out = json::array();
  std::visit(
      [&out](const auto& pts) {
        for (const auto& p : pts) {
          using P = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<P, PolarPoint>) {
            out.push_back({p.r, p.theta});
          } else if constexpr (std::is_same_v<P, EuclideanPoint>) {
            out.push_back({p.x, p.y});
          } else {
            out.push_back({p.vec().x(), p.vec().y(), p.vec().z()});
          }
        }
      },
      c.positions);
  return out;
}

std::string_view link_name(LinkFunction link) {
  switch (link) {
    case LinkFunction::FermiDirac: return "fermi-dirac";
    case LinkFunction::TwoLogistic: return "two-logistic";
    case LinkFunction::Exponential: return "exponential";
  }
  return "fermi-dirac";
}

LinkFunction parse_link(const std::string& name) {
  if (name == "fermi-dirac") return LinkFunction::FermiDirac;
  if (name == "two-logistic") return LinkFunction::TwoLogistic;
  if (name == "exponential") return LinkFunction::Exponential;
  throw DataError("unknown link function '" + name + "'");
}

void write_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
  for (Eigen::Index k = 0; k < m.size(); ++k) put_f64(out, m.data()[k]);
}

}  // namespace

LoadedGraph parse_edge_list(std::istream& in, std::string_view source) {
  std::optional<long long> declared_n;
  std::vector<std::pair<std::string, std::string>> raw;
  std::string line;
  int line_no = 0;
  const auto fail = [&](const std::string& what) {
    throw DataError(std::string(source) + ":" + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view s = trim(line);
    if (s.empty()) continue;
    if (s.front() == '#' || s.front() == '%') {
      const std::string_view body = trim(s.substr(1));
      if (body.starts_with("nodes=")) {
        declared_n = parse_integer(trim(body.substr(6)));
        if (!declared_n || *declared_n < 0) fail("bad node count in header");
      }
      continue;
    }
    std::istringstream tokens{std::string(s)};
    std::string a, b, extra;
    if (!(tokens >> a >> b) || (tokens >> extra)) fail("expected two node labels, got '" + std::string(s) + "'");
    raw.emplace_back(std::move(a), std::move(b));
  }
  if (!declared_n && raw.empty()) throw DataError(std::string(source) + ": empty edge list");

  LoadedGraph out;
  bool all_integer = true;
  for (const auto& [a, b] : raw) {
    all_integer = all_integer && parse_integer(a).has_value() && parse_integer(b).has_value();
  }
  if (declared_n && !all_integer) {
    throw DataError(std::string(source) + ": labels must be integers when nodes=N is given");
  }
  // Integer labels are compared by value, so "007" and "7" name one node.
  const auto canonical = [&](const std::string& label) {
    return all_integer ? std::to_string(*parse_integer(label)) : label;
  };

  std::map<std::string, int> id;
  if (declared_n) {
    for (const auto& [a, b] : raw) {
      for (const std::string* label : {&a, &b}) {
        const long long v = *parse_integer(*label);
        if (v < 0 || v >= *declared_n) {
          throw DataError(std::string(source) + ": node " + *label + " outside [0, " + std::to_string(*declared_n) +
                          ")");
        }
      }
    }
    for (long long v = 0; v < *declared_n; ++v) out.labels.push_back(std::to_string(v));
  } else {
    for (const auto& [a, b] : raw) {
      out.labels.push_back(canonical(a));
      out.labels.push_back(canonical(b));
    }
    if (all_integer) {
      std::sort(out.labels.begin(), out.labels.end(), [](const std::string& x, const std::string& y) {
        return *parse_integer(x) < *parse_integer(y);
      });
    } else {
      std::sort(out.labels.begin(), out.labels.end());
    }
    out.labels.erase(std::unique(out.labels.begin(), out.labels.end()), out.labels.end());
  }
  for (std::size_t k = 0; k < out.labels.size(); ++k) id[out.labels[k]] = static_cast<int>(k);
  const auto lookup = [&](const std::string& label) { return id.at(canonical(label)); };

  std::vector<Edge> edges;
  edges.reserve(raw.size());
  for (const auto& [a, b] : raw) {
    int u = lookup(a), v = lookup(b);
    if (u == v) {
      ++out.self_loops;
      continue;
    }
    if (u > v) std::swap(u, v);
    edges.push_back({u, v});
  }
  std::sort(edges.begin(), edges.end());
  const auto unique_end = std::unique(edges.begin(), edges.end());
  out.duplicates = static_cast<int>(edges.end() - unique_end);
  edges.erase(unique_end, edges.end());
  out.graph = Graph::from_edges(static_cast<int>(out.labels.size()), edges);
  return out;
}

LoadedGraph load_edge_list(const std::filesystem::path& path) {
  std::ifstream f = open_in(path);
  return parse_edge_list(f, path.string());
}

void write_edge_list(std::ostream& out, const Graph& g) {
  out << "# nodes=" << g.num_nodes() << '\n';
  for (const Edge& e : g.edges()) out << e.u << ' ' << e.v << '\n';
}

void save_edge_list(const std::filesystem::path& path, const Graph& g) {
  std::ofstream f = open_out(path);
  write_edge_list(f, g);
}

void save_label_mapping(const std::filesystem::path& path, const std::vector<std::string>& labels) {
  std::ofstream f = open_out(path);
  f << "id,label\n";
  for (std::size_t k = 0; k < labels.size(); ++k) f << k << ',' << labels[k] << '\n';
}

void save_ground_truth(const std::filesystem::path& path, const GroundTruth& truth) {
  const LatentConfiguration& c = truth.config;
  json j;
  j["geometry"] = std::string(to_string(c.geometry()));
  j["n"] = c.size();
  j["params"] = {{"R", c.params.R}, {"alpha", c.params.alpha}, {"T", c.params.T}};
  j["tau"] = c.tau;
  j["link"] = std::string(link_name(c.link));
  j["seed"] = truth.seed;
  j["positions"] = positions_json(c);
  std::ofstream f = open_out(path);
  f << j.dump(1) << '\n';
}

GroundTruth load_ground_truth(const std::filesystem::path& path) {
  std::ifstream f = open_in(path);
  GroundTruth t;
  try {
    const json j = json::parse(f);
    LatentConfiguration& c = t.config;
    c.params = {j.at("params").at("R").get<double>(), j.at("params").at("alpha").get<double>(),
                j.at("params").at("T").get<double>()};
    c.tau = j.value("tau", 0.0);
    c.link = parse_link(j.value("link", std::string("fermi-dirac")));
    t.seed = j.value("seed", std::uint64_t{0});
    const Geometry geometry = parse_geometry(j.at("geometry").get<std::string>());
    const json& pos = j.at("positions");
    if (geometry == Geometry::Hyperbolic) {
      std::vector<PolarPoint> pts;
      for (const json& p : pos) pts.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
      c.positions = std::move(pts);
    } else if (geometry == Geometry::Euclidean) {
      std::vector<EuclideanPoint> pts;
      for (const json& p : pos) pts.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
      c.positions = std::move(pts);
    } else {
      std::vector<SpherePoint> pts;
      for (const json& p : pos) {
        pts.emplace_back(Eigen::Vector3d(p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()));
      }
      c.positions = std::move(pts);
    }
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  return t;
}

void save_draws_csv(const std::filesystem::path& path, const PosteriorDraws& draws) {
  std::ofstream f = open_out(path);
  f.precision(17);
  f << "iter,R,alpha,T\n";
  for (std::size_t k = 0; k < draws.draws.size(); ++k) {
    const ModelParams& p = draws.draws[k].params;
    f << k << ',' << p.R << ',' << p.alpha << ',' << p.T << '\n';
  }
}

void save_diagnostics_json(const std::filesystem::path& path, const PosteriorDraws& draws) {
  json j;
  j["draws"] = draws.draws.size();
  j["acceptance_rate"] = draws.acceptance_rate;
  j["divergences"] = draws.divergence_count;
  j["warmup_divergences"] = draws.warmup_divergences;
  j["step_size"] = draws.step_size;
  j["diagnostic_failure"] = draws.diagnostic_failure;
  j["fixed_T"] = draws.fixed_T ? json(*draws.fixed_T) : json(nullptr);
  json ess = json::object(), rhat = json::object();
  for (const auto& [name, trace] : draws.traces) {
    const double e = effective_sample_size(trace);
    const double r = split_rhat(trace);
    ess[name] = std::isfinite(e) ? json(e) : json(nullptr);
    rhat[name] = std::isfinite(r) ? json(r) : json(nullptr);
  }
  j["ess"] = ess;
  j["split_rhat"] = rhat;
  std::ofstream f = open_out(path);
  f << j.dump(1) << '\n';
}

void save_position_draws(const std::filesystem::path& path, const PosteriorDraws& draws) {
  std::ofstream f = open_out(path, std::ios::binary);
  for (const PosteriorDraw& d : draws.draws) {
    for (const PolarPoint& p : d.positions) {
      put_f64(f, p.r);
      put_f64(f, p.theta);
    }
  }
}

void save_eval_json(const std::filesystem::path& path, const EvalReport& report) {
  json j;
  j["auc"] = report.auc;
  j["accuracy"] = report.accuracy;
  j["pearson"] = report.pearson ? json(*report.pearson) : json(nullptr);
  j["spearman"] = report.spearman ? json(*report.spearman) : json(nullptr);
  std::ofstream f = open_out(path);
  f << j.dump(1) << '\n';
}

void save_checkpoint(const std::filesystem::path& path, const VariationalState& state, const Graph& g) {
  const VariationalConfig& c = state.config;
  const EncoderWeights& w = state.encoder;
  json header;
  header["format"] = "hcls-vi-checkpoint";
  header["version"] = 1;
  header["model"] = state.model == LatentModel::Hyperbolic ? "hyperbolic" : "euclidean";
  header["graph"] = {{"n", g.num_nodes()}, {"m", g.num_edges()}};
  header["dims"] = {{"n", w.num_nodes()}, {"hidden", w.hidden()}};
  header["config"] = {{"epochs", c.epochs},
                      {"learning_rate", c.learning_rate},
                      {"hidden_dim", c.hidden_dim},
                      {"n_mc", c.n_mc},
                      {"clip_norm", c.clip_norm},
                      {"warm_start_epochs", c.warm_start_epochs},
                      {"fixed_T", c.fixed_T ? json(*c.fixed_T) : json(nullptr)}};
  header["seed"] = c.seed;
  header["step"] = state.step;
  header["elbo_trace"] = state.elbo_trace;

  // Payload blocks, float64 little-endian, matrices column-major.
  const std::pair<const char*, std::pair<Eigen::Index, Eigen::Index>> blocks[] = {
      {"w1", {w.w1.rows(), w.w1.cols()}},
      {"w2", {w.w2.rows(), w.w2.cols()}},
      {"globals", {3, 1}},
      {"adam_m", {state.adam_m.size(), 1}},
      {"adam_v", {state.adam_v.size(), 1}},
  };
  json layout = json::array();
  std::uint64_t offset = 0;
  for (const auto& [name, shape] : blocks) {
    layout.push_back({{"name", name}, {"offset", offset}, {"rows", shape.first}, {"cols", shape.second}});
    offset += static_cast<std::uint64_t>(shape.first * shape.second) * 8;
  }
  header["payload"] = {{"byte_order", "little-endian"}, {"dtype", "float64"}, {"order", "column-major"},
                       {"bytes", offset}, {"blocks", layout}};

  const std::string text = header.dump();
  std::ofstream f = open_out(path, std::ios::binary);
  f.write(kCheckpointMagic, sizeof kCheckpointMagic);
  put_u64(f, text.size());
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  write_matrix(f, w.w1);
  write_matrix(f, w.w2);
  write_matrix(f, state.globals);
  write_matrix(f, state.adam_m);
  write_matrix(f, state.adam_v);
  if (!f) throw DataError("failed writing " + path.string());
}

namespace {

json read_checkpoint_header(std::istream& f, const std::filesystem::path& path) {
  char magic[8];
  if (!f.read(magic, 8) || !std::equal(magic, magic + 8, kCheckpointMagic)) {
    throw DataError(path.string() + ": not a VI checkpoint");
  }
  const std::uint64_t len = get_u64(f);
  if (len > (1ULL << 32)) throw DataError(path.string() + ": corrupt header length");
  std::string text(len, '\0');
  if (!f.read(text.data(), static_cast<std::streamsize>(len))) throw DataError(path.string() + ": truncated header");
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace

std::pair<int, std::int64_t> checkpoint_graph_shape(const std::filesystem::path& path) {
  std::ifstream f = open_in(path, std::ios::binary);
  const json header = read_checkpoint_header(f, path);
  try {
    return {header.at("graph").at("n").get<int>(), header.at("graph").at("m").get<std::int64_t>()};
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

VariationalState load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f = open_in(path, std::ios::binary);
  const json header = read_checkpoint_header(f, path);
  VariationalState s;
  try {
    s.model = header.at("model").get<std::string>() == "euclidean" ? LatentModel::Euclidean : LatentModel::Hyperbolic;
    const json& c = header.at("config");
    s.config.epochs = c.at("epochs").get<int>();
    s.config.learning_rate = c.at("learning_rate").get<double>();
    s.config.hidden_dim = c.at("hidden_dim").get<int>();
    s.config.n_mc = c.at("n_mc").get<int>();
    s.config.clip_norm = c.at("clip_norm").get<double>();
    s.config.warm_start_epochs = c.at("warm_start_epochs").get<int>();
    if (!c.at("fixed_T").is_null()) s.config.fixed_T = c.at("fixed_T").get<double>();
    s.config.seed = header.at("seed").get<std::uint64_t>();
    s.fixed_T = s.config.fixed_T;
    s.step = header.at("step").get<int>();
    s.elbo_trace = header.at("elbo_trace").get<std::vector<double>>();

    const auto read_block = [&](const json& block, Eigen::MatrixXd& m) {
      const auto rows = block.at("rows").get<Eigen::Index>();
      const auto cols = block.at("cols").get<Eigen::Index>();
      if (rows < 0 || cols < 0 || rows * cols > (Eigen::Index{1} << 32)) throw DataError("bad block shape");
      m.resize(rows, cols);
      for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = get_f64(f);
    };
    std::map<std::string, Eigen::MatrixXd> blocks;
    for (const json& block : header.at("payload").at("blocks")) {
      read_block(block, blocks[block.at("name").get<std::string>()]);
    }
    s.encoder.w1 = blocks.at("w1");
    s.encoder.w2 = blocks.at("w2");
    const Eigen::MatrixXd& g = blocks.at("globals");
    if (g.size() != 3) throw DataError("globals block must hold 3 values");
    s.globals = Eigen::Map<const Eigen::Vector3d>(g.data());
    s.adam_m = blocks.at("adam_m").reshaped();
    s.adam_v = blocks.at("adam_v").reshaped();
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  } catch (const std::out_of_range&) {
    throw DataError(path.string() + ": missing payload block");
  }
  if (s.encoder.w2.rows() != s.encoder.w1.cols() || s.encoder.w2.cols() != 4) {
    throw DataError(path.string() + ": inconsistent encoder shapes");
  }
  return s;
}

}  // namespace hcls
