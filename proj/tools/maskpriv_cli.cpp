// Experiment harness for the privacy-preserving mask recognition pipeline:
// dataset generation, training, the deployment comparison table, the
// blur-factor sweep, multi-camera overlap simulation and offline capture
// audits.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "maskpriv/maskpriv.hpp"

namespace {

using namespace maskpriv;

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t next = text.find(',', pos);
        if (next == std::string::npos)
            next = text.size();
        out.push_back(std::stod(text.substr(pos, next - pos)));
        pos = next + 1;
    }
    return out;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    std::vector<std::uint64_t> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t next = text.find(',', pos);
        if (next == std::string::npos)
            next = text.size();
        out.push_back(std::stoull(text.substr(pos, next - pos)));
        pos = next + 1;
    }
    return out;
}

ModeKind parse_mode(const std::string& name) {
    if (name == "baseline")
        return ModeKind::baseline;
    if (name == "centralized")
        return ModeKind::centralized;
    if (name == "decentralized")
        return ModeKind::decentralized;
    throw InvalidParameter("unknown mode '" + name + "'");
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot open " + path + " for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out)
        throw IoError("write failed for " + path);
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

std::string format_ratio(const std::optional<double>& ratio) {
    return ratio ? csv::format_double(*ratio) : std::string("undefined");
}

int cmd_gen(const std::string& out_dir, int per_class, double hard_fraction, int size,
            std::uint64_t seed) {
    const auto samples = build_dataset({per_class, hard_fraction, size, seed});
    write_dataset(out_dir, samples);
    std::size_t masked = 0, hard = 0;
    for (const auto& s : samples) {
        masked += s.label == MaskLabel::mask;
        hard += s.spec.hard_case;
    }
    std::printf("wrote %zu samples to %s (%zu masked, %zu hard cases)\n", samples.size(),
                out_dir.c_str(), masked, hard);
    return 0;
}

int cmd_train(const std::string& dataset_dir, const std::string& model_out, int epochs,
              std::uint64_t seed, std::optional<double> blur_factor) {
    const auto samples = load_dataset(dataset_dir);
    TrainConfig cfg;
    cfg.epochs = epochs;
    cfg.seed = seed;
    std::optional<BlurFactor> blur;
    if (blur_factor)
        blur = BlurFactor(*blur_factor);
    const TrainResult result = train(samples, cfg, blur);
    std::printf("trained on %zu samples (%d epochs%s)\n", samples.size(), epochs,
                blur ? (" at blur f=" + csv::format_compact(blur->value)).c_str() : "");
    std::printf("held-out accuracy: %.6f  (tp=%llu tn=%llu fp=%llu fn=%llu)\n",
                result.holdout.accuracy,
                static_cast<unsigned long long>(result.holdout.tp),
                static_cast<unsigned long long>(result.holdout.tn),
                static_cast<unsigned long long>(result.holdout.fp),
                static_cast<unsigned long long>(result.holdout.fn));
    std::printf("training loss: %.6f (epoch 1) -> %.6f (epoch %d)\n", result.epoch_loss.front(),
                result.epoch_loss.back(), epochs);
    if (!model_out.empty()) {
        save_model(result.model, model_out);
        std::printf("model saved to %s (digest %016llx)\n", model_out.c_str(),
                    static_cast<unsigned long long>(model_digest(result.model)));
    }
    return 0;
}

int cmd_table(int per_class, double hard_fraction, int size, int epochs, std::uint64_t seed,
              double blur_factor, const std::string& out_csv) {
    TableConfig cfg;
    cfg.cell = {per_class, hard_fraction, size, epochs};
    cfg.seed = seed;
    cfg.blur_factor = blur_factor;
    const TableResult table = run_table(cfg);
    std::printf("%-15s %-10s %-10s %s\n", "mode", "accuracy", "delta", "compliance");
    for (const TableRow& row : table.rows)
        std::printf("%-15s %-10.4f %+-9.2f%% %s\n", row.mode.c_str(), row.metrics.accuracy,
                    row.delta_pct, row.compliant ? "ok" : "NON-COMPLIANT");
    if (!out_csv.empty()) {
        write_text(out_csv, csv::encode(table_csv(table)));
        std::printf("table written to %s\n", out_csv.c_str());
    }
    return 0;
}

int cmd_sweep(const std::string& f_values, const std::string& seeds, int per_class,
              double hard_fraction, int size, int epochs, const std::string& out_csv) {
    SweepConfig cfg;
    cfg.f_values = parse_double_list(f_values);
    cfg.seeds = parse_seed_list(seeds);
    cfg.cell = {per_class, hard_fraction, size, epochs};
    const SweepResult sweep = run_sweep(cfg, [](const SweepCell& cell) {
        std::fprintf(stderr, "sweep f=%g seed=%llu accuracy=%.4f\n", cell.f,
                     static_cast<unsigned long long>(cell.seed), cell.metrics.accuracy);
    });
    const std::string text = csv::encode(sweep_csv(sweep));
    if (!out_csv.empty()) {
        write_text(out_csv, text);
        std::printf("sweep written to %s (%zu cells)\n", out_csv.c_str(), sweep.cells.size());
    } else {
        std::fputs(text.c_str(), stdout);
    }
    return 0;
}

int cmd_simulate(const std::string& mode_name, std::optional<double> blur_factor, int persons,
                 int masked_count, int cameras, const std::vector<std::string>& dups,
                 const std::string& model_path, const std::string& detector_name,
                 std::uint64_t seed, int size, const std::string& capture_path) {
    if (masked_count < 0 || masked_count > persons)
        throw InvalidParameter("masked count must be within the population");

    std::vector<bool> masked(persons, false);
    for (int i = 0; i < masked_count; ++i)
        masked[i] = true;

    DuplicationPlan plan;
    plan.cameras_of_person.resize(persons);
    for (int i = 0; i < persons; ++i)
        plan.cameras_of_person[i] = {i % cameras};
    for (const std::string& dup : dups) {
        const std::size_t colon = dup.find(':');
        if (colon == std::string::npos)
            throw InvalidParameter("--dup expects person:cameras, got '" + dup + "'");
        const int person = std::stoi(dup.substr(0, colon));
        const int count = std::stoi(dup.substr(colon + 1));
        if (person < 0 || person >= persons)
            throw InvalidParameter("--dup person index out of range");
        if (count < 1 || count > cameras)
            throw InvalidParameter("--dup camera count out of range");
        plan.cameras_of_person[person].clear();
        for (int c = 0; c < count; ++c)
            plan.cameras_of_person[person].push_back((person + c) % cameras);
    }

    ClassifierModel model;
    const bool perfect = model_path.empty();
    std::optional<std::uint64_t> digest;
    if (!perfect) {
        model = load_model(model_path);
        digest = model_digest(model);
    }

    const ModeKind kind = parse_mode(mode_name);
    DeploymentMode mode;
    if (kind == ModeKind::centralized) {
        if (!blur_factor)
            throw ConfigurationError("centralized mode requires --blur-factor");
        const BlurFactor f(*blur_factor);
        mode = DeploymentMode::centralized(f, config_checksum(digest, f));
    } else {
        mode = kind == ModeKind::baseline ? DeploymentMode::baseline()
                                          : DeploymentMode::decentralized();
    }

    SimulationConfig cfg;
    cfg.cameras = cameras;
    cfg.mode = mode;
    cfg.detector = detector_name == "heuristic" ? DetectorKind::heuristic : DetectorKind::oracle;
    cfg.model = perfect ? nullptr : &model;
    cfg.image_size = size;
    cfg.seed = seed;

    const SimulationResult result = simulate_overlap(masked, cameras, plan, cfg);
    std::printf("mode:        %s%s\n", to_string(mode.kind),
                mode.kind == ModeKind::baseline ? "  (NON-COMPLIANT reference path)" : "");
    std::printf("classifier:  %s\n", perfect ? "perfect (ground truth)" : model_path.c_str());
    std::printf("naive ratio: %s  (%llu/%llu appearances)\n",
                format_ratio(result.naive.ratio).c_str(),
                static_cast<unsigned long long>(result.naive.persons_masked),
                static_cast<unsigned long long>(result.naive.persons_total));
    if (result.dedup)
        std::printf("dedup ratio: %s  (%llu/%llu after appearance grouping)\n",
                    format_ratio(result.dedup->ratio).c_str(),
                    static_cast<unsigned long long>(result.dedup->persons_masked),
                    static_cast<unsigned long long>(result.dedup->persons_total));
    std::printf("true ratio:  %s\n", csv::format_double(result.true_ratio).c_str());
    if (result.naive.ratio)
        std::printf("bias:        %+.6f\n", *result.naive.ratio - result.true_ratio);

    const std::string capture = encode_stream(result.messages);
    const AuditVerdict verdict = audit(capture, mode);
    std::printf("audit:       %s (%zu messages)\n",
                verdict.compliant ? "compliant" : "NON-COMPLIANT", result.messages.size());
    for (const AuditViolation& v : verdict.violations)
        std::printf("  violation at message %lld: %s\n", static_cast<long long>(v.index),
                    v.reason.c_str());
    if (!capture_path.empty()) {
        write_text(capture_path, capture);
        std::printf("capture:     %s (%zu bytes)\n", capture_path.c_str(), capture.size());
    }
    return 0;
}

int cmd_audit(const std::string& capture_path, const std::string& mode_name,
              std::optional<double> blur_factor) {
    const ModeKind kind = parse_mode(mode_name);
    DeploymentMode mode;
    if (kind == ModeKind::centralized) {
        if (!blur_factor)
            throw ConfigurationError("centralized mode requires --blur-factor");
        mode = DeploymentMode::centralized(BlurFactor(*blur_factor));
    } else {
        mode = kind == ModeKind::baseline ? DeploymentMode::baseline()
                                          : DeploymentMode::decentralized();
    }
    const std::string capture = read_text(capture_path);
    const AuditVerdict verdict = audit(capture, mode);
    if (verdict.compliant) {
        std::printf("compliant\n");
        return 0;
    }
    std::printf("NON-COMPLIANT (%zu violations)\n", verdict.violations.size());
    for (const AuditViolation& v : verdict.violations)
        std::printf("  message %lld: %s\n", static_cast<long long>(v.index), v.reason.c_str());
    return 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"privacy-preserving mask recognition harness"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "generate a synthetic labeled dataset");
    std::string gen_out;
    int gen_per_class = 500, gen_size = 64;
    double gen_hard = 0.0;
    std::uint64_t gen_seed = 1;
    gen->add_option("--out", gen_out, "output directory")->required();
    gen->add_option("--per-class", gen_per_class, "samples per class");
    gen->add_option("--hard-fraction", gen_hard, "fraction of masked samples made hard");
    gen->add_option("--size", gen_size, "image side in pixels");
    gen->add_option("--seed", gen_seed, "generation seed");

    // train
    auto* train_cmd = app.add_subcommand("train", "train the mask classifier on a dataset");
    std::string train_dataset, train_out;
    int train_epochs = 15;
    std::uint64_t train_seed = 1;
    std::optional<double> train_blur;
    train_cmd->add_option("--dataset", train_dataset, "dataset directory from 'gen'")->required();
    train_cmd->add_option("--out", train_out, "model output path");
    train_cmd->add_option("--epochs", train_epochs, "training epochs");
    train_cmd->add_option("--seed", train_seed, "training seed");
    train_cmd->add_option("--blur-factor", train_blur, "blur faces at this factor before training");

    // table
    auto* table = app.add_subcommand("table", "baseline vs centralized vs decentralized comparison");
    int table_per_class = 500, table_size = 64, table_epochs = 15;
    double table_hard = 0.0, table_blur = 5.0;
    std::uint64_t table_seed = 1;
    std::string table_out;
    table->add_option("--per-class", table_per_class, "samples per class");
    table->add_option("--hard-fraction", table_hard, "fraction of masked samples made hard");
    table->add_option("--size", table_size, "image side in pixels");
    table->add_option("--epochs", table_epochs, "training epochs");
    table->add_option("--seed", table_seed, "dataset/training seed");
    table->add_option("--blur-factor", table_blur, "centralized blur factor");
    table->add_option("--out", table_out, "CSV output path");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "privacy vs performance sweep over blur factors");
    std::string sweep_f = "1,2,3,5,8,16,32", sweep_seeds = "1,2,3", sweep_out;
    int sweep_per_class = 500, sweep_size = 64, sweep_epochs = 15;
    double sweep_hard = 0.0;
    sweep->add_option("--f-values", sweep_f, "comma-separated blur factors");
    sweep->add_option("--seeds", sweep_seeds, "comma-separated seeds");
    sweep->add_option("--per-class", sweep_per_class, "samples per class");
    sweep->add_option("--hard-fraction", sweep_hard, "fraction of masked samples made hard");
    sweep->add_option("--size", sweep_size, "image side in pixels");
    sweep->add_option("--epochs", sweep_epochs, "training epochs");
    sweep->add_option("--out", sweep_out, "CSV output path (stdout when omitted)");

    // simulate
    auto* sim = app.add_subcommand("simulate", "multi-camera overlap-bias simulation");
    std::string sim_mode = "decentralized", sim_model, sim_detector = "oracle", sim_capture;
    std::optional<double> sim_blur;
    int sim_persons = 10, sim_masked = 6, sim_cameras = 3, sim_size = 64;
    std::uint64_t sim_seed = 1;
    std::vector<std::string> sim_dups;
    sim->add_option("--mode", sim_mode, "baseline|centralized|decentralized");
    sim->add_option("--blur-factor", sim_blur, "blur factor (centralized mode)");
    sim->add_option("--persons", sim_persons, "population size");
    sim->add_option("--masked", sim_masked, "masked persons in the population");
    sim->add_option("--cameras", sim_cameras, "camera count");
    sim->add_option("--dup", sim_dups, "person:cameras duplication entries (repeatable)");
    sim->add_option("--model", sim_model, "trained model path (omit for perfect classifier)");
    sim->add_option("--detector", sim_detector, "oracle|heuristic");
    sim->add_option("--seed", sim_seed, "simulation seed");
    sim->add_option("--size", sim_size, "image side in pixels");
    sim->add_option("--capture", sim_capture, "write the wire capture to this file");

    // audit
    auto* audit_cmd = app.add_subcommand("audit", "offline privacy audit of a capture file");
    std::string audit_capture, audit_mode;
    std::optional<double> audit_blur;
    audit_cmd->add_option("--capture", audit_capture, "capture file")->required();
    audit_cmd->add_option("--mode", audit_mode, "declared deployment mode")->required();
    audit_cmd->add_option("--blur-factor", audit_blur, "declared blur factor (centralized)");

    try {
        app.parse(argc, argv);
        if (gen->parsed())
            return cmd_gen(gen_out, gen_per_class, gen_hard, gen_size, gen_seed);
        if (train_cmd->parsed())
            return cmd_train(train_dataset, train_out, train_epochs, train_seed, train_blur);
        if (table->parsed())
            return cmd_table(table_per_class, table_hard, table_size, table_epochs, table_seed,
                             table_blur, table_out);
        if (sweep->parsed())
            return cmd_sweep(sweep_f, sweep_seeds, sweep_per_class, sweep_hard, sweep_size,
                             sweep_epochs, sweep_out);
        if (sim->parsed())
            return cmd_simulate(sim_mode, sim_blur, sim_persons, sim_masked, sim_cameras,
                                sim_dups, sim_model, sim_detector, sim_seed, sim_size,
                                sim_capture);
        if (audit_cmd->parsed())
            return cmd_audit(audit_capture, audit_mode, audit_blur);
        return 2;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const maskpriv::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
