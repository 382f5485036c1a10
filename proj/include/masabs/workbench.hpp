#pragma once

// Case-study generators (coercion-resistant voting, postal voting), the
// benchmark grid runner and DOT export.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "masabs/abstraction.hpp"
#include "masabs/formula.hpp"
#include "masabs/model.hpp"

namespace masabs {

/// One voter choosing among `nc` candidates and a coercer that learns
/// whether the voter obeyed. Voter locations: idle, voted, obeyed, disobeyed.
std::string asv_text(int nc);
MASGraph gen_asv(int nc);

/// One Authority and `nv` voters Voter1..VoterNV built from one template,
/// each with its own channel triple. See MODEL.md for the modelling choices.
std::string postal_text(int nv, int nc);
MASGraph gen_postal(int nv, int nc);

/// Named postal abstractions: 1 removes every voter's mem_sg and mem_vt,
/// 2 removes mem_dec at {has, voted} and the Authority's dec_recv at
/// {coll_vts}, 3 is both.
std::vector<Mapping> postal_abstraction(const MASGraph& postal, int which);

/// A[] (sum of tally <= sum of pack_sent <= nv).
std::string phi_bstuff_text(int nv, int nc);
/// A[] (Authority.coll_vts imply sum of pack_sent == nv).
std::string phi_dispatch_text(int nv);

enum class BenchVariant { Concrete, Abs1, Abs2, Abs3, Custom };
std::string to_string(BenchVariant v);
BenchVariant parse_variant(const std::string& s);

struct BenchConfig {
    int nv_lo = 1, nv_hi = 1;
    int nc_lo = 1, nc_hi = 1;
    std::vector<BenchVariant> variants{BenchVariant::Concrete};
    std::string custom_config;  // abstraction config path for BenchVariant::Custom
    AbsMode mode = AbsMode::May;
    /// "bstuff", "dispatch" or a formula over the postal system.
    std::string formula = "bstuff";
    std::size_t max_states = 20'000'000;
    double time_budget_s = 600;  // per cell; checked between phases
    int workers = 1;
    std::string output;  // CSV path; empty = none
};

struct BenchRow {
    int nv = 0, nc = 0;
    BenchVariant variant = BenchVariant::Concrete;
    std::optional<std::size_t> states;  // absent on memout
    double ta_ms = 0;  // abstraction generation
    double tv_ms = 0;  // unwrapping and checking
    std::string verdict;  // "true", "false", "memout", "timeout" or "error: ..."
    bool memout = false;
};

/// Key = value lines (`#` comments): nv = "1..3", nc = "1..3",
/// variants = ["concrete", "abstraction-1", ...], mode, formula,
/// custom = "<config path>", max_states, time_budget_s, workers, output.
BenchConfig parse_bench_config(const std::string& text);
BenchConfig load_bench_config(const std::string& path);

/// Rows in grid order (NV outer, NC, then variant) whatever the worker count.
std::vector<BenchRow> run_bench(const BenchConfig& cfg);
std::string bench_csv(const std::vector<BenchRow>& rows);

/// DOT renderings. Agent graph: one node per location, edges labelled
/// guard:sync:update. Combined graph: edges additionally carry the
/// contributing agent edges. Model: one node per state.
std::string export_dot(const AgentGraph& a);
std::string export_dot(const CombinedGraph& g);
std::string export_dot(const Model& m);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace masabs
