// thinobs: configured solve / analyze / verify / report runs.
//
// exit codes: 0 ok, 1 config or I/O, 2 non-convergence, 3 acceptance failure

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <functional>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "thinobs/acceptance.hpp"
#include "thinobs/blowup.hpp"
#include "thinobs/config.hpp"
#include "thinobs/estimates.hpp"
#include "thinobs/frequency.hpp"
#include "thinobs/snapshot.hpp"
#include "thinobs/solver.hpp"

namespace fs = std::filesystem;
using namespace thinobs;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_config = 1;
constexpr int exit_nonconverged = 2;
constexpr int exit_acceptance = 3;

struct Context {
  RunConfig config;
  fs::path out;
  int threads = 1;
  bool allow_nonconverged = false;
  std::string snapshot;
};

std::string stamp(const RunConfig& c) {
  char t[32];
  const std::time_t now = std::time(nullptr);
  std::strftime(t, sizeof t, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return "# config_hash=" + hash_hex(c.hash()) + " time=" + t + "\n";
}

void write_text(const fs::path& p, const std::string& body) { write_file(p.string(), body); }

void write_csv(const Context& ctx, const std::string& name, const CsvTable& t) {
  write_text(ctx.out / name, stamp(ctx.config) + t.str());
}

CsvTable record_table(const Record& r) {
  CsvTable t({"key", "value"});
  for (const auto& [k, v] : r.entries()) t.add_row(std::vector<std::string>{k, v});
  return t;
}

void write_summary(const Context& ctx, const std::string& name, const Record& r) {
  write_text(ctx.out / name, stamp(ctx.config) + r.str());
}

// Runs tasks on up to `threads` workers; each task owns its output file.
void run_parallel(std::vector<std::function<void()>>& tasks, int threads) {
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) tasks[i]();
  };
  std::vector<std::thread> pool;
  const int n = std::max(1, std::min<int>(threads, static_cast<int>(tasks.size())));
  for (int k = 1; k < n; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
}

template <int Dim>
std::string point_str(const Point<Dim>& p) {
  std::string s;
  for (int k = 0; k < Dim; ++k) s += (k ? "," : "") + format_number(p[k]);
  return s;
}

Record solve_record(const RunConfig& c, const ComplementarityReport& kkt, int iterations, double residual,
                    bool converged, double omega, double tol, int polish) {
  Record r;
  r.add("config_hash", hash_hex(c.hash())).add("dimension", c.dimension).add("resolution", c.resolution);
  r.add("data", to_string(c.kind)).add("lambda", c.lambda.str());
  r.add("converged", converged).add("iterations", iterations).add("polish_sweeps", polish);
  r.add("residual", residual).add("omega", omega).add("tol", tol);
  r.add("kkt.thin_negativity", kkt.thin_negativity).add("kkt.thin_laplacian_excess", kkt.thin_laplacian_excess);
  r.add("kkt.complementarity", kkt.complementarity).add("kkt.interior_residual", kkt.interior_residual);
  r.add("kkt.max", kkt.max()).add("kkt.within_10tol", kkt.max() <= 10.0 * tol);
  return r;
}

template <int Dim>
Solution<Dim> run_solve(const RunConfig& c) {
  const auto grid = build_grid<Dim>(c.resolution, c.half_width);
  return solve<Dim>(grid, make_boundary_data<Dim>(c.kind, c.data_params()), c.solver_options());
}

template <int Dim>
int cmd_solve_dim(const Context& ctx) {
  const auto& c = ctx.config;
  const auto s = run_solve<Dim>(c);
  const auto kkt = kkt_report(s);
  write_file((ctx.out / "snapshot.bin").string(), encode_snapshot(s, c.hash()));
  const Record r = solve_record(c, kkt, s.iterations, s.residual, s.converged, s.omega, s.tol, s.polish_sweeps);
  write_csv(ctx, "kkt.csv", record_table(r));
  write_summary(ctx, "solve_summary.txt", r);
  std::cout << r.str();
  if (!s.converged) {
    std::cerr << "thinobs: solver did not converge in " << s.iterations << " sweeps (residual "
              << format_number(s.residual) << ")\n";
    if (!ctx.allow_nonconverged) return exit_nonconverged;
  }
  return exit_ok;
}

template <int Dim>
int cmd_analyze_dim(const Context& ctx) {
  const auto& c = ctx.config;
  const std::string path = ctx.snapshot.empty() ? (ctx.out / "snapshot.bin").string() : ctx.snapshot;
  const std::string bytes = read_file(path);
  const auto head = decode_snapshot_header(bytes);
  if (static_cast<int>(head.dimension) != c.dimension || static_cast<int>(head.resolution) != c.resolution ||
      head.half_width != c.half_width)
    throw Error("snapshot grid (n=" + std::to_string(head.dimension) + ", resolution " +
                std::to_string(head.resolution) + ", R " + format_number(head.half_width) +
                ") does not match the config grid");
  if (!head.converged() && !ctx.allow_nonconverged)
    throw Error("snapshot is flagged non-converged (pass --allow-nonconverged to analyze it anyway)");
  const auto s = decode_snapshot<Dim>(bytes);
  const double h = s.grid().spacing();
  const auto centers = c.template center_points<Dim>();
  const auto spine = data_spine<Dim>(c.data_params());
  const auto radii = dyadic_radii(c.r_max, c.effective_r_min());

  // one slot per request and center; filled concurrently, merged in order
  struct Slot {
    std::string prefix;
    Record record;
    bool pass = true;
  };
  std::vector<Slot> slots;
  std::vector<std::function<void()>> tasks;
  std::mutex io;
  auto guarded = [&](std::size_t k, std::function<void(Slot&)> body) {
    return [&, k, body] {
      Slot& slot = slots[k];
      try {
        body(slot);
      } catch (const std::exception& e) {
        slot.pass = false;
        slot.record.add("error", e.what());
      }
      slot.record.add("pass", slot.pass);
    };
  };

  std::optional<Solution<Dim>> reference;
  auto wants = [&](const char* r) { return std::find(c.requests.begin(), c.requests.end(), r) != c.requests.end(); };
  if (c.kind == DataKind::perturbed_profile && (wants("decay") || wants("wlapw") || wants("holder"))) {
    // lattice reference: the same grid solved for the unperturbed profile
    RunConfig rc = c;
    rc.kind = DataKind::profile;
    reference = run_solve<Dim>(rc);
  }

  for (const auto& req : c.requests) {
    if (req == "frequency" || req == "decay") {
      for (std::size_t i = 0; i < centers.size(); ++i) {
        const auto x0 = centers[i];
        slots.push_back({req + "." + std::to_string(i), {}, true});
        const std::size_t k = slots.size() - 1;
        if (req == "frequency") {
          tasks.push_back(guarded(k, [&, x0, i](Slot& slot) {
            slot.record.add("center", point_str<Dim>(x0));
            const auto curve = frequency_curve<Dim>(s.u, x0, radii, c.mus, c.gammas);
            {
              std::lock_guard lock(io);
              write_csv(ctx, "frequency_" + std::to_string(i) + ".csv", curve.csv());
            }
            if (curve.rows.size() >= 3) {
              const auto mono = check_monotone(curve.phi(), c.allowance, "phi");
              slot.record.merge("phi_monotone", mono.record());
              slot.pass = slot.pass && mono.pass;
            }
            if (near_contact(s, x0, 8.0 * h)) slot.record.merge("estimate", estimate_frequency<Dim>(s, x0).record());
          }));
        } else {
          tasks.push_back(guarded(k, [&, x0, i](Slot& slot) {
            slot.record.add("center", point_str<Dim>(x0));
            DecayParams p;
            p.eps = c.flatness_eps;
            p.sigma = c.sigma;
            p.gamma = c.gamma;
            const auto scan = reference
                                  ? decay_scan_reference<Dim>(s.u, reference->u, x0, c.lambda, c.decay_r0,
                                                              c.decay_k_max, p)
                                  : decay_scan<Dim>(s, x0, c.lambda, c.decay_r0, c.decay_k_max, p);
            slot.record.add("reference", reference ? "lattice" : "analytic");
            slot.record.merge("", scan.summary());
            {
              std::lock_guard lock(io);
              write_csv(ctx, "decay_" + std::to_string(i) + ".csv", scan.csv());
            }
          }));
        }
      }
      continue;
    }
    slots.push_back({req, {}, true});
    const std::size_t k = slots.size() - 1;
    if (req == "contact") {
      tasks.push_back(guarded(k, [&](Slot& slot) {
        const auto cs = contact_set(s);
        std::vector<std::string> cols;
        for (int a = 0; a < Dim - 1; ++a) cols.push_back("x" + std::to_string(a + 1));
        cols.push_back("u");
        cols.push_back("free_boundary");
        CsvTable t(cols);
        std::vector<char> edge(s.grid().size(), 0);
        for (std::size_t j : cs.free_boundary) edge[j] = 1;
        for (std::size_t j : cs.nodes) {
          const auto x = s.grid().position(j);
          std::vector<std::string> row;
          for (int a = 0; a < Dim - 1; ++a) row.push_back(format_number(x[a]));
          row.push_back(format_number(s.u[j]));
          row.push_back(edge[j] ? "1" : "0");
          t.add_row(row);
        }
        slot.record.add("zero_tol", cs.zero_tol).add("contact_nodes", cs.nodes.size());
        slot.record.add("free_boundary_nodes", cs.free_boundary.size());
        std::lock_guard lock(io);
        write_csv(ctx, "contact.csv", t);
      }));
    } else if (req == "wlapw") {
      tasks.push_back(guarded(k, [&](Slot& slot) {
        const auto rep = reference ? verify_nonlinear_wlapw<Dim>(s.u - reference->u, radii)
                                   : verify_nonlinear_wlapw<Dim>(s, c.lambda, c.tau, spine, radii);
        slot.record.add("residual", reference ? "lattice" : "analytic").merge("", rep.record());
        std::lock_guard lock(io);
        write_csv(ctx, "wlapw.csv", rep.csv());
      }));
    } else if (req == "barrier") {
      tasks.push_back(guarded(k, [&](Slot& slot) {
        const auto bar = verify_barrier<Dim>(s, c.lambda, c.tau, c.delta, spine);
        const auto mass = verify_laplacian_mass<Dim>(s, c.lambda, c.tau, spine, c.delta);
        slot.record.merge("barrier", bar.record()).merge("laplacian_mass", mass.record());
        slot.pass = bar.hard_holds && bar.easy_holds;
        std::lock_guard lock(io);
        write_csv(ctx, "barrier.csv", record_table(slot.record));
      }));
    } else if (req == "holder") {
      tasks.push_back(guarded(k, [&](Slot& slot) {
        const auto w = reference ? s.u - reference->u : profile_residual<Dim>(s, c.lambda, c.tau, spine);
        slot.record.add("residual", reference ? "lattice" : "analytic");
        const auto rep = verify_holder_decay<Dim>(w, holder_deltas(s.grid()), spine);
        slot.record.merge("", rep.record());
        std::lock_guard lock(io);
        write_csv(ctx, "holder.csv", rep.csv());
      }));
    }
  }
  run_parallel(tasks, ctx.threads);

  Record summary;
  summary.add("config_hash", hash_hex(c.hash())).add("snapshot", path);
  summary.add("snapshot_config_hash", hash_hex(head.config_hash)).add("snapshot_converged", head.converged());
  summary.add("requests", slots.size());
  bool all = true;
  for (const auto& slot : slots) {
    summary.merge(slot.prefix, slot.record);
    all = all && slot.pass;
  }
  summary.add("pass", all);
  write_summary(ctx, "analyze_summary.txt", summary);
  std::cout << summary.str();
  return exit_ok;
}

int cmd_verify(const Context& ctx) {
  const auto& c = ctx.config;
  AcceptanceOptions opt;
  opt.resolution_2d = c.resolution_2d;
  opt.resolution_3d = c.resolution_3d;
  opt.allowance = c.verify_allowance;
  opt.seed = c.seed;
  opt.criteria = c.criteria;
  Acceptance acc(opt);
  const auto results = acc.run_all([](const CriterionResult& r) { std::cout << r.line() << std::endl; });
  CsvTable t({"id", "name", "pass", "detail"});
  Record summary;
  summary.add("config_hash", hash_hex(c.hash()));
  std::vector<std::string> failed;
  for (const auto& r : results) {
    std::string detail = r.detail;
    std::replace(detail.begin(), detail.end(), ',', ';');
    t.add_row(std::vector<std::string>{std::to_string(r.id), r.name, r.pass ? "1" : "0", detail});
    summary.add(r.name, r.pass);
    if (!r.pass) failed.push_back(std::to_string(r.id) + " " + r.name);
  }
  summary.add("criteria", results.size()).add("failed", failed.size()).add("pass", failed.empty());
  write_csv(ctx, "verify.csv", t);
  write_summary(ctx, "verify_summary.txt", summary);
  if (!failed.empty()) {
    std::string list;
    for (std::size_t i = 0; i < failed.size(); ++i) list += (i ? ", " : "") + failed[i];
    std::cerr << "thinobs: acceptance failed: " << list << "\n";
    return exit_acceptance;
  }
  return exit_ok;
}

int cmd_report(const Context& ctx) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(ctx.out))
    if (e.is_regular_file() && e.path().filename().string().ends_with("_summary.txt")) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::string body;
  for (const auto& f : files) body += "## " + f.filename().string() + "\n" + read_file(f.string()) + "\n";
  write_text(ctx.out / "report.txt", body);
  std::cout << body;
  return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"thin obstacle numerical laboratory"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  int threads = 1;
  bool allow_nonconverged = false;
  std::string snapshot;
  auto common = [&](CLI::App* sub, bool needs_config) {
    auto* opt = sub->add_option("--config", config_path, "run configuration (INI)");
    if (needs_config) opt->required();
    sub->add_option("--out", out_dir, "output directory (overrides run.output_dir)");
    sub->add_option("--threads", threads, "worker threads for analysis requests")->check(CLI::PositiveNumber);
    sub->add_flag("--allow-nonconverged", allow_nonconverged, "accept a solve that hit max_iter");
  };
  auto* solve_cmd = app.add_subcommand("solve", "solve the configured problem and write a snapshot");
  auto* analyze_cmd = app.add_subcommand("analyze", "run the configured diagnostics on a snapshot");
  auto* verify_cmd = app.add_subcommand("verify", "run the acceptance suite");
  auto* report_cmd = app.add_subcommand("report", "concatenate the summaries of an output directory");
  common(solve_cmd, true);
  common(analyze_cmd, true);
  analyze_cmd->add_option("--snapshot", snapshot, "snapshot file (default OUT/snapshot.bin)");
  common(verify_cmd, false);
  common(report_cmd, false);
  CLI11_PARSE(app, argc, argv);

  Context ctx;
  try {
    if (!config_path.empty()) ctx.config = load_config(config_path);
    ctx.out = out_dir.empty() ? fs::path(ctx.config.output_dir) : fs::path(out_dir);
    ctx.threads = threads;
    ctx.allow_nonconverged = allow_nonconverged;
    ctx.snapshot = snapshot;
    if (!report_cmd->parsed()) {
      fs::create_directories(ctx.out);
      write_text(ctx.out / "config.ini", ctx.config.to_ini());
    }
  } catch (const std::exception& e) {
    std::cerr << "thinobs: " << e.what() << "\n";
    return exit_config;
  }
  try {
    const bool three = ctx.config.dimension == 3;
    if (solve_cmd->parsed()) return three ? cmd_solve_dim<3>(ctx) : cmd_solve_dim<2>(ctx);
    if (analyze_cmd->parsed()) return three ? cmd_analyze_dim<3>(ctx) : cmd_analyze_dim<2>(ctx);
    if (verify_cmd->parsed()) return cmd_verify(ctx);
    return cmd_report(ctx);
  } catch (const std::exception& e) {
    std::cerr << "thinobs: " << e.what() << "\n";
    return exit_config;
  }
}
