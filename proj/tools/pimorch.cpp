// pimorch command-line driver: validate, candidates, schedule, place, simulate,
// compare, report, sweep.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <future>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pimorch/arch.hpp"
#include "pimorch/errors.hpp"
#include "pimorch/ilp.hpp"
#include "pimorch/io.hpp"
#include "pimorch/model.hpp"
#include "pimorch/placement.hpp"
#include "pimorch/sim.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace pimorch;

constexpr const char* kTool = "pimorch";
constexpr const char* kVersion = "0.1.0";

enum Exit { kOk = 0, kInvalid = 1, kInfeasible = 2, kInternal = 3 };

struct Flags {
    std::string model;
    std::string arch;
    int batch = 0;
    double time_limit = 60.0;
    std::int64_t coarsen_budget = 0;
    bool no_reuse = false;
    bool no_sharing = false;
    std::string cost_model = "ideal";
    int threads = 0;
};

struct Inputs {
    ModelSpec model;
    ArchSpec arch;
    std::vector<std::pair<std::string, std::string>> files;  // path, content
};

void add_inputs(CLI::App* sub, Flags& f) {
    sub->add_option("--model", f.model, "Model config (JSON)")->required();
    sub->add_option("--arch", f.arch, "Architecture config (JSON)")->required();
}

void add_scheduling(CLI::App* sub, Flags& f) {
    sub->add_option("--batch", f.batch, "Batch size N^bt (overrides the model config)")->check(CLI::PositiveNumber);
    sub->add_option("--time-limit", f.time_limit, "Solver time limit in seconds")->capture_default_str();
    sub->add_option("--coarsen-budget", f.coarsen_budget, "Binary-variable budget; thins candidate domains");
    sub->add_flag("--no-reuse", f.no_reuse, "Disable weight reuse across temporal layers");
    sub->add_flag("--no-sharing", f.no_sharing, "Disable intra-sub-array weight sharing");
    sub->add_option("--cost-model", f.cost_model, "GeMM utilization model")
        ->check(CLI::IsMember({"ideal", "fill_drain"}))
        ->capture_default_str();
    sub->add_option("--threads", f.threads, "Worker threads (0 = hardware)")->capture_default_str();
}

Inputs load_inputs(const Flags& f) {
    Inputs in;
    const std::string mtext = read_text_file(f.model);
    const std::string atext = read_text_file(f.arch);
    in.model = load_model(mtext);
    in.arch = load_arch(atext);
    if (f.batch > 0) in.model.batch = f.batch;
    in.files = {{f.model, mtext}, {f.arch, atext}};
    return in;
}

SchedulerOptions options_from(const Flags& f) {
    SchedulerOptions o;
    o.reuse = !f.no_reuse;
    o.sharing = !f.no_sharing;
    o.cost_model = parse_utilization_model(f.cost_model);
    o.time_limit_s = f.time_limit;
    o.coarsen_budget = f.coarsen_budget;
    o.threads = f.threads;
    return o;
}

// Options recorded in a schedule document apply unless overridden on the command line.
void merge_schedule_options(const std::string& text, CLI::App* sub, Inputs& in, SchedulerOptions& o) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("schedule: ") + e.what());
    }
    if (doc.contains("options") && doc["options"].is_object()) {
        const auto& opt = doc["options"];
        if (opt.contains("reuse") && opt["reuse"].is_boolean() && sub->count("--no-reuse") == 0) {
            o.reuse = opt["reuse"].get<bool>();
        }
        if (opt.contains("sharing") && opt["sharing"].is_boolean() && sub->count("--no-sharing") == 0) {
            o.sharing = opt["sharing"].get<bool>();
        }
        if (opt.contains("cost_model") && opt["cost_model"].is_string() && sub->count("--cost-model") == 0) {
            o.cost_model = parse_utilization_model(opt["cost_model"].get<std::string>());
        }
    }
    if (doc.contains("batch") && doc["batch"].is_number_integer() && sub->count("--batch") == 0) {
        in.model.batch = doc["batch"].get<int>();
    }
}

std::string timestamp() {
    std::time_t t = std::time(nullptr);
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) t = static_cast<std::time_t>(std::atoll(epoch));
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

json manifest(const std::string& command, const std::vector<std::pair<std::string, std::string>>& files,
              const SchedulerOptions* opts, int batch) {
    json m;
    m["tool"] = kTool;
    m["version"] = kVersion;
    m["command"] = command;
    json inputs = json::array();
    for (const auto& [path, content] : files) {
        inputs.push_back({{"path", path}, {"fnv1a64", hex64(fnv1a64(content))}});
    }
    m["inputs"] = inputs;
    if (opts) {
        m["options"] = {{"batch", batch},
                        {"reuse", opts->reuse},
                        {"sharing", opts->sharing},
                        {"cost_model", std::string(to_string(opts->cost_model))},
                        {"time_limit_s", opts->time_limit_s},
                        {"coarsen_budget", opts->coarsen_budget}};
    }
    m["timestamp"] = timestamp();
    return m;
}

std::string with_manifest(const std::string& doc_text, const json& m) {
    json doc = json::parse(doc_text);
    doc["manifest"] = m;
    return doc.dump(2) + "\n";
}

void emit(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
    } else {
        write_text_file(path, content);
    }
}

// Non-JSON artifacts written to a file get their manifest alongside.
void emit_with_sidecar(const std::string& path, const std::string& content, const json& m) {
    emit(path, content);
    if (!path.empty() && path != "-") write_text_file(path + ".manifest.json", m.dump(2) + "\n");
}

std::string mib(double bytes) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(3) << bytes / (1024.0 * 1024.0) << " MiB";
    return os.str();
}

void print_schedule(std::ostream& os, const Schedule& s, std::int64_t cap) {
    os << "status " << to_string(s.status) << ", objective " << s.objective << " cycles";
    if (s.status == SolveStatus::time_limit) os << " (gap " << std::setprecision(4) << s.gap * 100 << "%)";
    os << "\n";
    for (const auto& st : s.stages) {
        os << "stage " << st.stage << " (" << st.branches << " branches):";
        for (const auto& l : st.layers) {
            os << " [" << l.choice.u << "," << l.choice.v << "]x" << l.choice.count;
            if (l.reuse_from) os << "*";
        }
        os << "\n";
    }
    os << "memory: weights " << mib(s.memory.weights) << " + workspace "
       << mib(static_cast<double>(s.memory.workspace)) << " = " << mib(s.memory.total()) << " of "
       << mib(static_cast<double>(cap)) << "\n";
    for (const auto& n : s.notes) os << "note: " << n << "\n";
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

// ---------------------------------------------------------------------------

int cmd_validate(const Flags& f, const std::string& schedule_path) {
    Inputs in = load_inputs(f);
    std::cout << "model " << in.model.name << ": " << in.model.stages.size() << " stage(s)\n";
    for (const auto& st : derive_stages(in.model)) {
        const Domains d = candidate_domains(st, in.arch);
        std::cout << "  stage " << st.index << ": C=" << st.channels << " res=" << st.res_h << "x" << st.res_w
                  << " branches=" << st.branches << " (" << st.branch_rows << "x" << st.branch_cols
                  << ") heads=" << st.heads << " N=" << st.region_patches << " |U|=" << d.u.size()
                  << " |V|=" << d.v.size();
        if (st.padded()) std::cout << " padded_patches=" << st.padded_patches;
        std::cout << "\n";
    }
    std::cout << "arch " << in.arch.name << ": " << in.arch.grid_h << "x" << in.arch.grid_w << " nodes, "
              << mib(static_cast<double>(in.arch.node_cap)) << " per node\n";
    if (schedule_path.empty()) return kOk;

    const IlpInstance inst = build_ilp(in.model, in.arch, SchedulerOptions{});
    const Schedule s = evaluate_schedule(inst, load_schedule_choices(read_text_file(schedule_path)));
    const ValidationReport r = check_schedule(inst, s);
    for (const auto& c : r.checks) {
        std::cout << (c.pass ? "PASS " : "FAIL ") << c.name;
        if (c.stage) std::cout << " stage " << c.stage;
        std::cout << " slack " << c.slack;
        if (!c.detail.empty()) std::cout << "  " << c.detail;
        std::cout << "\n";
    }
    return r.ok() ? kOk : kInvalid;
}

int cmd_candidates(const Flags& f, const std::string& format, const std::string& out) {
    Inputs in = load_inputs(f);
    const SchedulerOptions o = options_from(f);
    const IlpInstance inst = build_ilp(in.model, in.arch, o);
    if (format == "json") {
        json doc;
        doc["schema_version"] = 1;
        doc["kind"] = "candidates";
        json stages = json::array();
        for (const auto& t : inst.stages) {
            json js;
            js["stage"] = t.stage.index;
            js["U"] = t.domains.u;
            js["V"] = t.domains.v;
            json es = json::array();
            for (const auto& e : t.entries) {
                es.push_back({{"alpha", e.alpha},
                              {"beta", e.beta},
                              {"u", e.u},
                              {"v", e.v},
                              {"valid", e.valid},
                              {"packing", e.packing},
                              {"compute_cycles", e.cost.compute},
                              {"transfer_cycles", e.cost.transfer},
                              {"weight_share_cycles", e.cost.weight_share},
                              {"layer_cycles", e.layer_cycles},
                              {"block_weight_bytes", e.block_weight},
                              {"pm_weight_bytes", e.pm_weight},
                              {"workspace_bytes", e.workspace}});
            }
            js["candidates"] = es;
            stages.push_back(js);
        }
        doc["stages"] = stages;
        doc["manifest"] = manifest("candidates", in.files, &o, in.model.batch);
        emit(out, doc.dump(2) + "\n");
        return kOk;
    }
    std::ostringstream os;
    for (const auto& t : inst.stages) {
        os << "stage " << t.stage.index << "  binaries " << t.domains.u.size() * t.domains.v.size() *
                                                               t.stage.branches * (2 * t.stage.branches + 1)
           << "\n";
        os << "      u    v  packing        cycles   weight/node   workspace\n";
        for (const auto& e : t.entries) {
            os << std::setw(7) << e.u << std::setw(5) << e.v;
            if (!e.valid) {
                os << "  (does not fit)\n";
                continue;
            }
            os << std::setw(9) << e.packing << std::setw(14) << e.layer_cycles << std::setw(14)
               << static_cast<std::int64_t>(std::llround(t.stage.blocks * e.block_weight + e.pm_weight))
               << std::setw(12) << e.workspace << "\n";
        }
    }
    emit(out, os.str());
    return kOk;
}

int cmd_schedule(CLI::App* sub, const Flags& f, const std::string& out, const std::string& lp_path) {
    Inputs in = load_inputs(f);
    const SchedulerOptions o = options_from(f);
    const IlpInstance inst = build_ilp(in.model, in.arch, o);
    (void)sub;
    if (!lp_path.empty()) {
        std::ostringstream lp;
        materialize(inst).write_lp(lp);
        write_text_file(lp_path, lp.str());
    }
    const Schedule s = solve(inst);
    print_schedule(out.empty() || out == "-" ? std::cerr : std::cout, s, in.arch.node_cap);
    if (!out.empty()) {
        emit(out, with_manifest(schedule_to_json(s), manifest("schedule", in.files, &o, in.model.batch)));
    }
    return kOk;
}

struct Loaded {
    Inputs in;
    SchedulerOptions opts;
    IlpInstance inst;
    Schedule schedule;
};

Loaded load_scheduled(CLI::App* sub, const Flags& f, const std::string& schedule_path) {
    Loaded l;
    l.in = load_inputs(f);
    l.opts = options_from(f);
    if (schedule_path.empty()) {
        l.inst = build_ilp(l.in.model, l.in.arch, l.opts);
        l.schedule = solve(l.inst);
        return l;
    }
    const std::string text = read_text_file(schedule_path);
    merge_schedule_options(text, sub, l.in, l.opts);
    l.in.files.push_back({schedule_path, text});
    l.inst = build_ilp(l.in.model, l.in.arch, l.opts);
    l.schedule = evaluate_schedule(l.inst, load_schedule_choices(text));
    const ValidationReport r = check_schedule(l.inst, l.schedule);
    if (!r.ok()) {
        const auto* c = r.failures().front();
        if (c->name == "Constraint 5") throw InfeasibleError(c->name, "schedule: " + c->detail);
        throw ValidationError("schedule violates " + c->name +
                              (c->stage ? " in stage " + std::to_string(c->stage) : std::string()) + ": " +
                              c->detail);
    }
    return l;
}

int cmd_place(CLI::App* sub, const Flags& f, const std::string& schedule_path, const std::string& strategy,
              const std::string& out, const std::string& render_path) {
    Loaded l = load_scheduled(sub, f, schedule_path);
    const Placement p = place(l.schedule, l.in.model, l.in.arch, parse_bind_strategy(strategy));
    std::ostream& log = out.empty() || out == "-" ? std::cerr : std::cout;
    for (const auto& sp : p.stages) {
        log << "stage " << sp.stage << ": " << sp.graph.edges.size() << " edges, avg hops " << std::fixed
            << std::setprecision(3) << sp.cost.avg_hops << ", hop-bytes " << std::setprecision(0)
            << sp.cost.total_hop_bytes << "\n";
        log.unsetf(std::ios::fixed);
    }
    if (!out.empty()) {
        emit(out, with_manifest(placement_to_json(p), manifest("place", l.in.files, &l.opts, l.in.model.batch)));
    }
    if (!render_path.empty()) emit(render_path, render_placement(p));
    return kOk;
}

void emit_reports(const std::string& command, const std::vector<CostReport>& reports, ReportFormat fmt,
                  const std::string& out, const json& m) {
    std::string body = emit_report(reports, fmt);
    if (fmt == ReportFormat::json) {
        emit(out, with_manifest(body, m));
    } else {
        emit_with_sidecar(out, body, m);
    }
    (void)command;
}

int cmd_simulate(CLI::App* sub, const Flags& f, const std::string& schedule_path,
                 const std::string& placement_path, const std::string& format, const std::string& out) {
    Loaded l = load_scheduled(sub, f, schedule_path);
    Placement p;
    if (placement_path.empty()) {
        p = place(l.schedule, l.in.model, l.in.arch);
    } else {
        const std::string text = read_text_file(placement_path);
        l.in.files.push_back({placement_path, text});
        p = place_with_binding(l.schedule, l.in.model, l.in.arch, text);
    }
    const SimResult r = simulate(l.inst, l.schedule, p);
    emit_reports("simulate", {r.report}, parse_report_format(format), out,
                 manifest("simulate", l.in.files, &l.opts, l.in.model.batch));
    return kOk;
}

int cmd_compare(CLI::App* sub, const Flags& f, const std::string& baselines, const std::string& format,
                const std::string& out) {
    Loaded l = load_scheduled(sub, f, "");
    const Placement p = place(l.schedule, l.in.model, l.in.arch);
    std::vector<CostReport> reports{simulate(l.inst, l.schedule, p).report};
    for (const auto& b : split(baselines, ',')) {
        reports.push_back(run_baseline(l.inst, parse_baseline(b)).result.report);
    }
    emit_reports("compare", reports, parse_report_format(format), out,
                 manifest("compare", l.in.files, &l.opts, l.in.model.batch));
    return kOk;
}

int cmd_report(const std::string& input, const std::string& format, const std::string& out) {
    const std::string text = read_text_file(input);
    const auto reports = reports_from_json(text);
    const ReportFormat fmt = parse_report_format(format);
    emit_reports("report", reports, fmt, out, manifest("report", {{input, text}}, nullptr, 0));
    return kOk;
}

struct SweepRow {
    int grid_h = 0, grid_w = 0;
    double cap_mib = 0;
    std::string status;
    std::int64_t cycles = 0;
    double ms = 0, utilization = 0, weights = 0, speedup_b = 0;
    std::int64_t workspace = 0;
};

int cmd_sweep(const Flags& f, const std::string& grids, const std::string& caps, const std::string& out) {
    Inputs in = load_inputs(f);
    const SchedulerOptions o = options_from(f);
    std::vector<std::pair<int, int>> grid_list;
    for (const auto& g : split(grids, ',')) {
        const auto parts = split(g, 'x');
        if (parts.size() != 2) throw ConfigError("sweep: grid '" + g + "' is not HxW");
        grid_list.push_back({std::stoi(parts[0]), std::stoi(parts[1])});
    }
    std::vector<double> cap_list;
    for (const auto& c : split(caps, ',')) cap_list.push_back(std::stod(c));
    if (grid_list.empty()) grid_list.push_back({in.arch.grid_h, in.arch.grid_w});
    if (cap_list.empty()) cap_list.push_back(static_cast<double>(in.arch.node_cap) / (1024.0 * 1024.0));

    auto run_one = [&](int gh, int gw, double cap) {
        SweepRow row;
        row.grid_h = gh;
        row.grid_w = gw;
        row.cap_mib = cap;
        ArchSpec a = in.arch;
        a.grid_h = gh;
        a.grid_w = gw;
        a.node_cap = static_cast<std::int64_t>(std::llround(cap * 1024.0 * 1024.0));
        SchedulerOptions so = o;
        so.threads = 1;
        try {
            validate(a);
            const IlpInstance inst = build_ilp(in.model, a, so);
            const Schedule s = solve(inst);
            const SimResult r = simulate(inst, s, place(s, in.model, a));
            const BaselineRun b = run_baseline(inst, BaselineKind::branch);
            row.status = std::string(to_string(s.status));
            row.cycles = r.report.total_cycles;
            row.ms = r.report.total_ms();
            row.utilization = r.report.utilization;
            row.weights = s.memory.weights;
            row.workspace = s.memory.workspace;
            row.speedup_b = static_cast<double>(b.result.report.total_cycles) / std::max<std::int64_t>(1, row.cycles);
        } catch (const InfeasibleError&) {
            row.status = "infeasible";
        } catch (const ValidationError& e) {
            row.status = "invalid";
        }
        return row;
    };

    std::vector<std::future<SweepRow>> jobs;
    for (auto [gh, gw] : grid_list) {
        for (double cap : cap_list) {
            jobs.push_back(std::async(f.threads == 1 ? std::launch::deferred : std::launch::async, run_one, gh,
                                      gw, cap));
        }
    }
    std::ostringstream os;
    os << "grid_h,grid_w,node_cap_mib,status,total_cycles,total_ms,utilization,weight_bytes,workspace_bytes,"
          "speedup_vs_B\n";
    os << std::setprecision(10);
    for (auto& j : jobs) {
        const SweepRow r = j.get();
        os << r.grid_h << ',' << r.grid_w << ',' << r.cap_mib << ',' << r.status << ',' << r.cycles << ','
           << r.ms << ',' << r.utilization << ',' << r.weights << ',' << r.workspace << ',' << r.speedup_b
           << '\n';
    }
    emit_with_sidecar(out, os.str(), manifest("sweep", in.files, &o, in.model.batch));
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Partitioning, scheduling and placement of vision transformers on tiled PIM systems"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    Flags f;
    std::string schedule_path, placement_path, out, format, lp_path, strategy = "greedy", render_path;
    std::string baselines = "b,p,ah", input, grids, caps;

    auto* validate_cmd = app.add_subcommand("validate", "Check model/arch configs and optionally a schedule");
    add_inputs(validate_cmd, f);
    validate_cmd->add_option("--schedule", schedule_path, "Schedule document to verify");

    auto* cand_cmd = app.add_subcommand("candidates", "List partition candidates and their coefficients");
    add_inputs(cand_cmd, f);
    add_scheduling(cand_cmd, f);
    cand_cmd->add_option("--format", format, "text or json")->check(CLI::IsMember({"text", "json"}));
    cand_cmd->add_option("--emit", out, "Output path (default stdout)");

    auto* sched_cmd = app.add_subcommand("schedule", "Solve the scheduling problem");
    add_inputs(sched_cmd, f);
    add_scheduling(sched_cmd, f);
    sched_cmd->add_option("--emit", out, "Write schedule.json ('-' for stdout)");
    sched_cmd->add_option("--lp", lp_path, "Also write the explicit model in LP format");

    auto* place_cmd = app.add_subcommand("place", "Lay out temporal layers and bind branches");
    add_inputs(place_cmd, f);
    add_scheduling(place_cmd, f);
    place_cmd->add_option("--schedule", schedule_path, "Schedule document (solved when omitted)");
    place_cmd->add_option("--strategy", strategy, "greedy or row_major")
        ->check(CLI::IsMember({"greedy", "row_major"}))
        ->capture_default_str();
    place_cmd->add_option("--emit", out, "Write placement.json ('-' for stdout)");
    place_cmd->add_option("--render", render_path, "Write a plain-text grid rendering ('-' for stdout)");

    auto* sim_cmd = app.add_subcommand("simulate", "Run a placed schedule on the cost model");
    add_inputs(sim_cmd, f);
    add_scheduling(sim_cmd, f);
    sim_cmd->add_option("--schedule", schedule_path, "Schedule document (solved when omitted)");
    sim_cmd->add_option("--placement", placement_path, "Placement document (greedy binding when omitted)");
    sim_cmd->add_option("--format", format, "text, json or csv")->check(CLI::IsMember({"text", "json", "csv"}));
    sim_cmd->add_option("--emit", out, "Output path (default stdout)");

    auto* cmp_cmd = app.add_subcommand("compare", "Compare the optimized schedule against fixed baselines");
    add_inputs(cmp_cmd, f);
    add_scheduling(cmp_cmd, f);
    cmp_cmd->add_option("--baselines", baselines, "Comma-separated subset of b,p,ah")->capture_default_str();
    cmp_cmd->add_option("--format", format, "text, json or csv")->check(CLI::IsMember({"text", "json", "csv"}));
    cmp_cmd->add_option("--emit", out, "Output path (default stdout)");

    auto* rep_cmd = app.add_subcommand("report", "Re-emit a JSON cost report in another format");
    rep_cmd->add_option("--input", input, "Cost report JSON")->required();
    rep_cmd->add_option("--format", format, "text, json or csv")->check(CLI::IsMember({"text", "json", "csv"}));
    rep_cmd->add_option("--emit", out, "Output path (default stdout)");

    auto* sweep_cmd = app.add_subcommand("sweep", "Grid-size and node-memory design-space sweep");
    add_inputs(sweep_cmd, f);
    add_scheduling(sweep_cmd, f);
    sweep_cmd->add_option("--grids", grids, "Comma-separated HxW list, e.g. 8x8,16x16");
    sweep_cmd->add_option("--caps", caps, "Comma-separated node capacities in MiB");
    sweep_cmd->add_option("--emit", out, "CSV output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kInvalid;
    }

    try {
        if (*validate_cmd) return cmd_validate(f, schedule_path);
        if (*cand_cmd) return cmd_candidates(f, format.empty() ? "text" : format, out);
        if (*sched_cmd) return cmd_schedule(sched_cmd, f, out, lp_path);
        if (*place_cmd) return cmd_place(place_cmd, f, schedule_path, strategy, out, render_path);
        if (*sim_cmd) return cmd_simulate(sim_cmd, f, schedule_path, placement_path, format.empty() ? "text" : format, out);
        if (*cmp_cmd) return cmd_compare(cmp_cmd, f, baselines, format.empty() ? "csv" : format, out);
        if (*rep_cmd) return cmd_report(input, format.empty() ? "text" : format, out);
        if (*sweep_cmd) return cmd_sweep(f, grids, caps, out);
    } catch (const InfeasibleError& e) {
        std::cerr << "infeasible (" << e.constraint() << "): " << e.what() << "\n";
        return kInfeasible;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kInvalid;
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kInvalid;
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kInvalid;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kInternal;
    }
    return kInternal;
}
