#include "qnlab/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <thread>

namespace qnlab {

const char* const kTraceHeader = "iter,method,seed,grad_norm,err_norm,delta_k,cos_to_pcg,wall_ns";

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a ^ (b + 0x9E3779B97F4A7C15ULL + (a << 6) + (a >> 2));
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

StrategyConfig seeded(StrategyConfig cfg, std::uint64_t seed) {
  if (cfg.rho.kind == RhoSchedule::Kind::scaled_random) cfg.rho.seed = mix_seed(cfg.rho.seed, seed);
  if (cfg.phi.kind == PhiSchedule::Kind::random_admissible) cfg.phi.seed = mix_seed(cfg.phi.seed, seed);
  return cfg;
}

void run_pool(std::vector<std::function<void()>>& tasks, unsigned threads) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, tasks.size())));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      tasks[i]();
    }
  };
  if (threads <= 1) {
    worker();
    return;
  }
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

}  // namespace

void ExperimentConfig::validate() const {
  if (methods.empty()) throw InvalidSpec("experiment has no methods");
  if (seeds.empty()) throw InvalidSpec("experiment has no seeds");
  if (!fixed_problem) problem.validate();
  const std::size_t n = fixed_problem ? fixed_problem->n : problem.n;
  for (const auto& m : methods) {
    m.config.validate(n);
    m.mode.validate();
  }
  opts.validate();
  if (oracle_digits) ScalarMode::big(*oracle_digits).validate();
}

bool ExperimentResult::any_breakdown() const {
  return std::any_of(summary.begin(), summary.end(), [](const SummaryRow& r) { return r.breakdown; });
}

double ExperimentResult::median_iterations(const std::string& method) const {
  std::vector<double> v;
  for (const auto& r : summary)
    if (r.method == method) v.push_back(static_cast<double>(r.iterations));
  if (v.empty()) throw InvalidInput("no runs for method " + method);
  return median(std::move(v));
}

double median(std::vector<double> v) {
  if (v.empty()) throw InvalidInput("median of an empty sample");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::string sanitize_label(const std::string& label) {
  std::string out;
  for (char c : label) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.') {
      out += c;
    } else if (c == '=' || c == '(' || c == ':') {
      out += '_';
    }
  }
  return out;
}

double compare_to_oracle(const Trace& a, const Trace& b) {
  const std::size_t common = std::min(a.iterates.size(), b.iterates.size());
  if (common == 0) throw InvalidInput("compare_to_oracle: no common recorded iterates");
  double worst = 0.0;
  for (std::size_t i = 0; i < common; ++i) {
    worst = std::max(worst, to_double(norm2(sub(a.iterates[i], b.iterates[i]))));
  }
  return worst;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::size_t ns = cfg.seeds.size();
  const std::size_t nm = cfg.methods.size();

  std::vector<QuadraticProblem> problems(ns);
  for (std::size_t s = 0; s < ns; ++s) {
    if (cfg.fixed_problem) {
      problems[s] = *cfg.fixed_problem;
    } else {
      SpectrumSpec spec = cfg.problem;
      spec.seed = cfg.seeds[s];
      problems[s] = make_random_qp(spec);
    }
  }
  std::vector<Vector<double>> x0(ns);
  for (std::size_t s = 0; s < ns; ++s) x0[s] = initial_point(problems[s].n, cfg.x0_random, cfg.seeds[s]);

  ExperimentResult res;
  res.traces.resize(nm * ns);
  if (cfg.oracle_digits) res.oracle_traces.resize(ns);

  std::vector<std::function<void()>> tasks;
  if (cfg.oracle_digits) {
    for (std::size_t s = 0; s < ns; ++s) {
      tasks.emplace_back([&, s] {
        RunOptions o = cfg.opts;
        o.mode = ScalarMode::big(*cfg.oracle_digits);
        o.record_iterates = true;
        StrategyConfig pcg = method_pcg();
        pcg.label = "PCG-" + std::to_string(*cfg.oracle_digits);
        res.oracle_traces[s] = run_trace(problems[s], pcg, x0[s], o);
        res.oracle_traces[s].seed = cfg.seeds[s];
      });
    }
  }
  for (std::size_t m = 0; m < nm; ++m) {
    for (std::size_t s = 0; s < ns; ++s) {
      tasks.emplace_back([&, m, s] {
        RunOptions o = cfg.opts;
        o.mode = cfg.methods[m].mode;
        if (cfg.oracle_digits) o.record_iterates = true;
        Trace t = run_trace(problems[s], seeded(cfg.methods[m].config, cfg.seeds[s]), x0[s], o);
        t.seed = cfg.seeds[s];
        res.traces[m * ns + s] = std::move(t);
      });
    }
  }
  // Longest tasks first keeps the pool busy; order does not affect results.
  std::reverse(tasks.begin(), tasks.end());
  run_pool(tasks, cfg.threads);

  for (std::size_t m = 0; m < nm; ++m) {
    for (std::size_t s = 0; s < ns; ++s) {
      const Trace& t = res.traces[m * ns + s];
      SummaryRow row;
      row.method = t.method;
      row.seed = t.seed;
      row.iterations = t.iterations;
      row.final_grad_norm = t.final_grad_norm();
      row.breakdown = t.status == RunStatus::breakdown;
      row.status = t.status;
      row.reason = t.reason;
      if (cfg.oracle_digits && !t.iterates.empty() && !res.oracle_traces[s].iterates.empty()) {
        row.max_dev_oracle = compare_to_oracle(t, res.oracle_traces[s]);
      }
      res.summary.push_back(std::move(row));
    }
  }
  return res;
}

void write_trace_csv(std::ostream& os, const Trace& trace) {
  os << kTraceHeader << '\n';
  for (const auto& r : trace.rows) {
    os << r.iter << ',' << csv_field(trace.method) << ',' << trace.seed << ',' << fmt17(r.grad_norm) << ','
       << fmt17(r.err_norm) << ',' << (r.delta_k ? fmt17(*r.delta_k) : "") << ','
       << (r.cos_to_pcg ? fmt17(*r.cos_to_pcg) : "") << ',' << r.wall_ns << '\n';
  }
}

void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows) {
  os << "method,seed,iterations,final_grad_norm,max_dev_oracle,breakdown,status,reason\n";
  for (const auto& r : rows) {
    os << csv_field(r.method) << ',' << r.seed << ',' << r.iterations << ',' << fmt17(r.final_grad_norm) << ','
       << (r.max_dev_oracle ? fmt17(*r.max_dev_oracle) : "") << ',' << (r.breakdown ? 1 : 0) << ','
       << to_string(r.status) << ',' << csv_field(r.reason) << '\n';
  }
}

void write_medians_csv(std::ostream& os, const ExperimentResult& result) {
  os << "method,runs,median_iterations,median_final_grad_norm,median_max_dev_oracle,breakdowns\n";
  std::vector<std::string> order;
  std::map<std::string, std::vector<const SummaryRow*>> groups;
  for (const auto& r : result.summary) {
    if (!groups.count(r.method)) order.push_back(r.method);
    groups[r.method].push_back(&r);
  }
  for (const auto& name : order) {
    const auto& g = groups[name];
    std::vector<double> it, gn, dev;
    std::size_t breakdowns = 0;
    for (const auto* r : g) {
      it.push_back(static_cast<double>(r->iterations));
      gn.push_back(r->final_grad_norm);
      if (r->max_dev_oracle) dev.push_back(*r->max_dev_oracle);
      breakdowns += r->breakdown ? 1 : 0;
    }
    os << csv_field(name) << ',' << g.size() << ',' << fmt17(median(it)) << ',' << fmt17(median(gn)) << ','
       << (dev.empty() ? "" : fmt17(median(dev))) << ',' << breakdowns << '\n';
  }
}

void write_experiment(const ExperimentConfig& cfg, const ExperimentResult& result) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) throw InvalidInput("cannot create output directory " + cfg.out_dir + ": " + ec.message());
  auto open = [&](const std::string& file) {
    const std::string path = (fs::path(cfg.out_dir) / file).string();
    std::ofstream os(path);
    if (!os) throw InvalidInput("cannot write " + path);
    return os;
  };
  auto write_one = [&](const Trace& t) {
    auto os = open(sanitize_label(t.method) + "_seed" + std::to_string(t.seed) + ".csv");
    write_trace_csv(os, t);
  };
  for (const auto& t : result.oracle_traces) write_one(t);
  for (const auto& t : result.traces) write_one(t);
  {
    auto os = open("summary.csv");
    write_summary_csv(os, result.summary);
  }
  {
    auto os = open("medians.csv");
    write_medians_csv(os, result);
  }
}

// ---------------------------------------------------------------------------

StrategyConfig method_pcg() {
  StrategyConfig c;
  c.family = Family::pcg;
  return c;
}

StrategyConfig method_bfgs() {
  StrategyConfig c;
  c.family = Family::bfgs;
  return c;
}

StrategyConfig method_dfp() {
  StrategyConfig c;
  c.family = Family::broyden;
  c.phi = PhiSchedule::constant(1.0);
  return c;
}

StrategyConfig method_mup(const RhoSchedule& rho) {
  StrategyConfig c;
  c.family = Family::mup;
  c.rho = rho;
  return c;
}

StrategyConfig method_lc(std::size_t m, MemoryPolicy policy) {
  StrategyConfig c;
  c.family = Family::lc;
  c.memory = m;
  c.policy = policy;
  return c;
}

StrategyConfig method_sympcgs(std::size_t m, MemoryPolicy policy) {
  StrategyConfig c;
  c.family = Family::sympcgs;
  c.memory = m;
  c.policy = policy;
  return c;
}

StrategyConfig method_lbfgs(std::size_t m, MemoryPolicy policy) {
  StrategyConfig c;
  c.family = Family::lbfgs;
  c.memory = m;
  c.policy = policy;
  return c;
}

std::vector<ExperimentConfig> preset(const std::string& name, const std::string& out_root) {
  namespace fs = std::filesystem;
  auto base = [&](const std::string& sub, std::size_t n, double cond) {
    ExperimentConfig e;
    e.name = sub;
    e.problem.n = n;
    e.problem.cond_target = cond;
    e.seeds = {1, 2, 3, 4, 5};
    e.opts.tol = 1e-12;
    e.opts.tol_relative = true;
    e.out_dir = (fs::path(out_root) / sub).string();
    return e;
  };
  auto add = [](ExperimentConfig& e, StrategyConfig c) { e.methods.push_back({std::move(c), ScalarMode::native()}); };

  std::vector<ExperimentConfig> out;
  if (name == "fig1") {
    ExperimentConfig e = base("fig1", 300, 1e4);
    add(e, method_pcg());
    add(e, method_bfgs());
    add(e, method_mup(RhoSchedule::scaled_random(1e-1, 1e8, 0)));
    e.oracle_digits = 512;
    out.push_back(std::move(e));
  } else if (name == "fig2" || name == "fig3") {
    ExperimentConfig e = name == "fig2" ? base("fig2", 40, 1e3) : base("fig3", 200, 1e4);
    add(e, method_bfgs());
    for (std::size_t m : {3u, 8u}) {
      add(e, method_lbfgs(m, MemoryPolicy::standard));
      add(e, method_lbfgs(m, MemoryPolicy::keep_first));
      add(e, method_lc(m, MemoryPolicy::standard));
      add(e, method_lc(m, MemoryPolicy::keep_first));
    }
    add(e, method_pcg());
    out.push_back(std::move(e));
  } else if (name == "fig4") {
    for (auto [n, cond] : {std::pair<std::size_t, double>{40, 1e3}, {1000, 1e5}}) {
      ExperimentConfig e = base("fig4/n" + std::to_string(n), n, cond);
      add(e, method_bfgs());
      add(e, method_lbfgs(5, MemoryPolicy::keep_first));
      StrategyConfig lc = method_lc(5, MemoryPolicy::keep_first);
      lc.solve = SolveMode::reduced;
      lc.basis = BasisRule::five_column();
      add(e, lc);
      StrategyConfig sp = method_sympcgs(5, MemoryPolicy::keep_first);
      sp.solve = SolveMode::reduced;
      sp.basis = BasisRule::five_column();
      add(e, sp);
      add(e, method_pcg());
      if (n > 100) e.seeds = {1};
      out.push_back(std::move(e));
    }
  } else {
    throw InvalidSpec("unknown preset: " + name);
  }
  return out;
}

}  // namespace qnlab
