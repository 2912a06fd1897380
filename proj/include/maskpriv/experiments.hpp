#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "maskpriv/classifier.hpp"
#include "maskpriv/csv.hpp"
#include "maskpriv/dataset.hpp"
#include "maskpriv/pipeline.hpp"

namespace maskpriv {

/// One training cell: synthesize the seed's dataset, train at the given blur
/// (if any) with the paper-style defaults, return model and held-out metrics.
/// Both the comparison table and the sweep go through here, so a sweep cell
/// at (f, seed) and the table's centralized run at the same f and seed are
/// the same computation.
struct CellConfig {
    int per_class = 500;
    double hard_fraction = 0.0;
    int image_size = 64;
    int epochs = 15;
};

inline TrainResult train_cell(std::uint64_t seed, const CellConfig& cfg,
                              std::optional<BlurFactor> blur,
                              const std::vector<LabeledSample>* prebuilt = nullptr) {
    TrainConfig tc;
    tc.epochs = cfg.epochs;
    tc.seed = seed;
    if (prebuilt)
        return train(*prebuilt, tc, blur);
    const auto samples = build_dataset({cfg.per_class, cfg.hard_fraction, cfg.image_size, seed});
    return train(samples, tc, blur);
}

// ---------------------------------------------------------------------------
// Deployment comparison table
// ---------------------------------------------------------------------------

struct TableConfig {
    CellConfig cell;
    std::uint64_t seed = 1;
    double blur_factor = 5.0;
};

struct TableRow {
    std::string mode;
    Metrics metrics;
    double delta_pct = 0.0; // accuracy delta vs baseline, percentage points
    bool compliant = true;
};

struct TableResult {
    std::vector<TableRow> rows; // baseline, centralized, decentralized
};

inline TableResult run_table(const TableConfig& cfg) {
    const auto samples = build_dataset(
        {cfg.cell.per_class, cfg.cell.hard_fraction, cfg.cell.image_size, cfg.seed});
    const TrainResult baseline = train_cell(cfg.seed, cfg.cell, {}, &samples);
    const TrainResult central =
        train_cell(cfg.seed, cfg.cell, BlurFactor(cfg.blur_factor), &samples);

    TableResult out;
    out.rows.push_back({"baseline", baseline.holdout, 0.0, false});
    out.rows.push_back({"centralized", central.holdout,
                        (central.holdout.accuracy - baseline.holdout.accuracy) * 100.0, true});
    // Decentralized shares the baseline model and evaluation path; only the
    // deployment differs, so its accuracy delta is identically zero.
    out.rows.push_back({"decentralized", baseline.holdout, 0.0, true});
    return out;
}

inline std::vector<csv::Row> table_csv(const TableResult& table) {
    std::vector<csv::Row> rows;
    rows.push_back({"mode", "accuracy", "delta_pct", "compliant", "tp", "tn", "fp", "fn"});
    for (const TableRow& r : table.rows)
        rows.push_back({r.mode, csv::format_double(r.metrics.accuracy),
                        csv::format_double(r.delta_pct, 2),
                        r.compliant ? "yes" : "NON-COMPLIANT",
                        std::to_string(r.metrics.tp), std::to_string(r.metrics.tn),
                        std::to_string(r.metrics.fp), std::to_string(r.metrics.fn)});
    return rows;
}

// ---------------------------------------------------------------------------
// Blur-factor sweep (privacy vs. performance tradeoff)
// ---------------------------------------------------------------------------

struct SweepConfig {
    std::vector<double> f_values = {1, 2, 3, 5, 8, 16, 32};
    std::vector<std::uint64_t> seeds = {1, 2, 3};
    CellConfig cell;
};

struct SweepCell {
    double f = 1.0;
    std::uint64_t seed = 0;
    Metrics metrics;
};

struct SweepSummary {
    double f = 1.0;
    double mean_accuracy = 0.0;
    Metrics summed; // confusion counts summed over seeds
};

struct SweepResult {
    std::vector<SweepCell> cells;        // sorted by (f, seed)
    std::vector<SweepSummary> summaries; // sorted by f
};

inline void validate(const SweepConfig& cfg) {
    if (cfg.f_values.empty())
        throw InvalidParameter("sweep: f_values must be non-empty");
    for (double f : cfg.f_values)
        if (!(f >= 1.0))
            throw InvalidParameter("sweep: every blur factor must be >= 1");
    if (cfg.seeds.empty())
        throw InvalidParameter("sweep: seeds must be non-empty");
}

/// Retrains per (f, seed) on that seed's dataset and reports held-out
/// metrics, plus a per-f summary row with the mean accuracy across seeds.
inline SweepResult run_sweep(const SweepConfig& cfg,
                             const std::function<void(const SweepCell&)>& progress = {}) {
    validate(cfg);
    SweepResult result;
    for (std::uint64_t seed : cfg.seeds) {
        const auto samples = build_dataset(
            {cfg.cell.per_class, cfg.cell.hard_fraction, cfg.cell.image_size, seed});
        for (double f : cfg.f_values) {
            const TrainResult r = train_cell(seed, cfg.cell, BlurFactor(f), &samples);
            result.cells.push_back({f, seed, r.holdout});
            if (progress)
                progress(result.cells.back());
        }
    }
    std::sort(result.cells.begin(), result.cells.end(), [](const SweepCell& a, const SweepCell& b) {
        return a.f != b.f ? a.f < b.f : a.seed < b.seed;
    });
    for (double f : cfg.f_values) {
        SweepSummary s;
        s.f = f;
        std::size_t count = 0;
        for (const SweepCell& c : result.cells) {
            if (c.f != f)
                continue;
            s.mean_accuracy += c.metrics.accuracy;
            s.summed.tp += c.metrics.tp;
            s.summed.tn += c.metrics.tn;
            s.summed.fp += c.metrics.fp;
            s.summed.fn += c.metrics.fn;
            ++count;
        }
        s.mean_accuracy /= static_cast<double>(count);
        s.summed.accuracy = s.summed.total()
                                ? static_cast<double>(s.summed.tp + s.summed.tn) /
                                      static_cast<double>(s.summed.total())
                                : 0.0;
        result.summaries.push_back(s);
    }
    std::sort(result.summaries.begin(), result.summaries.end(),
              [](const SweepSummary& a, const SweepSummary& b) { return a.f < b.f; });
    return result;
}

inline std::vector<csv::Row> sweep_csv(const SweepResult& sweep) {
    std::vector<csv::Row> rows;
    rows.push_back({"f", "seed", "accuracy", "tp", "tn", "fp", "fn"});
    std::size_t cell_idx = 0;
    for (const SweepSummary& summary : sweep.summaries) {
        while (cell_idx < sweep.cells.size() && sweep.cells[cell_idx].f == summary.f) {
            const SweepCell& c = sweep.cells[cell_idx++];
            rows.push_back({csv::format_compact(c.f), std::to_string(c.seed),
                            csv::format_double(c.metrics.accuracy),
                            std::to_string(c.metrics.tp), std::to_string(c.metrics.tn),
                            std::to_string(c.metrics.fp), std::to_string(c.metrics.fn)});
        }
        rows.push_back({csv::format_compact(summary.f), "mean",
                        csv::format_double(summary.mean_accuracy),
                        std::to_string(summary.summed.tp), std::to_string(summary.summed.tn),
                        std::to_string(summary.summed.fp), std::to_string(summary.summed.fn)});
    }
    return rows;
}

} // namespace maskpriv
