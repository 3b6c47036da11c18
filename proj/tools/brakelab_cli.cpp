#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "brakelab.h"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

enum Exit { exit_ok = 0, exit_config = 2, exit_numerical = 3, exit_acceptance = 4 };

struct ConfigError {
    std::string path, message;
};

std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
    std::string hex;
    char buf[3];
    for (unsigned i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", md[i]);
        hex += buf;
    }
    return hex;
}

// Reads fields from a JSON object, filling in defaults and recording the effective value.
class Fields {
public:
    Fields(const ordered_json& src, ordered_json& eff, std::string path) : src_(src), eff_(eff), path_(std::move(path)) {
        if (!src_.is_null() && !src_.is_object()) throw ConfigError{path_.empty() ? "/" : path_, "must be an object"};
    }

    std::string at(const std::string& key) const { return path_ + "/" + key; }
    bool has(const std::string& key) const { return src_.is_object() && src_.contains(key); }

    double number(const std::string& key, std::optional<double> def) {
        if (!has(key)) {
            if (!def) throw ConfigError{at(key), "required field missing"};
            eff_[key] = *def;
            return *def;
        }
        const auto& v = src_[key];
        if (!v.is_number()) throw ConfigError{at(key), "must be a number"};
        eff_[key] = v;
        return v.get<double>();
    }

    long long integer(const std::string& key, std::optional<long long> def, long long lo, long long hi) {
        if (!has(key)) {
            if (!def) throw ConfigError{at(key), "required field missing"};
            eff_[key] = *def;
            return *def;
        }
        const auto& v = src_[key];
        if (!v.is_number_integer() && !v.is_number_unsigned()) throw ConfigError{at(key), "must be an integer"};
        long long x = v.get<long long>();
        if (x < lo || x > hi)
            throw ConfigError{at(key), "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]"};
        eff_[key] = x;
        return x;
    }

    std::uint64_t seed(const std::string& key) {
        if (!has(key)) throw ConfigError{at(key), "required field missing (sampling probes need an explicit seed)"};
        const auto& v = src_[key];
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
            throw ConfigError{at(key), "must be a non-negative integer"};
        eff_[key] = v;
        return v.get<std::uint64_t>();
    }

    bool boolean(const std::string& key, bool def) {
        if (!has(key)) {
            eff_[key] = def;
            return def;
        }
        if (!src_[key].is_boolean()) throw ConfigError{at(key), "must be a boolean"};
        eff_[key] = src_[key];
        return src_[key].get<bool>();
    }

    std::vector<double> vec(const std::string& key, std::size_t n, std::optional<std::vector<double>> def) {
        if (!has(key)) {
            if (!def) throw ConfigError{at(key), "required field missing"};
            eff_[key] = *def;
            return *def;
        }
        const auto& v = src_[key];
        if (!v.is_array() || v.size() != n)
            throw ConfigError{at(key), "must be an array of " + std::to_string(n) + " numbers"};
        std::vector<double> out;
        for (std::size_t i = 0; i < n; ++i) {
            if (!v[i].is_number()) throw ConfigError{at(key) + "/" + std::to_string(i), "must be a number"};
            out.push_back(v[i].get<double>());
        }
        eff_[key] = out;
        return out;
    }

    void positive(const std::string& key, double v) const {
        if (!(v > 0)) throw ConfigError{at(key), "must be positive"};
    }

    void tolerance(const std::string& key, double v) const {
        if (!(v >= 1e-14 && v <= 1e-4)) throw ConfigError{at(key), "must lie in [1e-14, 1e-4]"};
    }

    void reject_unknown(std::initializer_list<const char*> known) const {
        if (!src_.is_object()) return;
        for (auto it = src_.begin(); it != src_.end(); ++it) {
            bool ok = false;
            for (auto k : known) ok = ok || it.key() == k;
            if (!ok) throw ConfigError{at(it.key()), "unknown field"};
        }
    }

    const ordered_json& raw(const std::string& key) const { return src_[key]; }

private:
    const ordered_json& src_;
    ordered_json& eff_;
    std::string path_;
};

struct Run {
    std::string sub;
    fs::path out;
    int threads = 1;
    bool threads_flag = false;
    std::optional<std::uint64_t> seed_flag;
    ordered_json config; // as read
    ordered_json effective;
    std::string hash;
    std::vector<ordered_json> outputs;
};

// thread count does not change any output, so it stays out of the hash
std::string config_hash(ordered_json eff) {
    eff.erase("threads");
    return sha256_hex(eff.dump());
}

struct Failure {
    brk_status status;
    std::string message;
};

void check(brk_status s) {
    if (s != BRK_OK) throw Failure{s, brk_last_error()};
}

struct Masses {
    brk_masses* h = nullptr;
    ~Masses() { brk_masses_free(h); }
};

struct Result {
    brk_result* r = nullptr;
    ~Result() { brk_result_free(r); }
};

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_file(Run& run, const std::string& name, const std::string& body, std::size_t rows) {
    fs::path p = run.out / name;
    std::ofstream f(p, std::ios::binary);
    if (!f) throw Failure{BRK_E_INTERNAL, "cannot write " + p.string()};
    f << body;
    ordered_json o;
    o["file"] = name;
    if (rows != std::size_t(-1)) o["rows"] = rows;
    o["sha256"] = sha256_hex(body);
    run.outputs.push_back(o);
}

void emit(Run& run, const brk_result* r) {
    std::string stem = run.sub;
    std::size_t nt = brk_result_table_count(r);
    for (std::size_t t = 0; t < nt; ++t) {
        std::ostringstream csv;
        std::size_t nc = brk_result_cols(r, t), nr = brk_result_rows(r, t);
        for (std::size_t c = 0; c < nc; ++c) csv << (c ? "," : "") << brk_result_column(r, t, c);
        csv << '\n';
        for (std::size_t i = 0; i < nr; ++i) {
            const double* row = brk_result_row(r, t, i);
            for (std::size_t c = 0; c < nc; ++c) csv << (c ? "," : "") << fmt17(row[c]);
            csv << '\n';
        }
        std::string name = nt == 1 ? stem + ".csv" : stem + "_" + brk_result_table_name(r, t) + ".csv";
        write_file(run, name, csv.str(), nr);
    }
    write_file(run, stem + ".json", std::string(brk_result_summary(r)) + "\n", std::size_t(-1));
}

void write_manifest(Run& run, double wall, int exit_code, const std::string& message) {
    ordered_json m;
    m["tool"] = "brakelab";
    m["version"] = brk_version();
    m["subcommand"] = run.sub;
    m["config"] = run.config;
    m["effective_config"] = run.effective;
    m["config_hash"] = run.hash;
    m["threads"] = run.threads;
    m["wall_time_s"] = wall;
    m["exit_code"] = exit_code;
    if (!message.empty()) m["message"] = message;
    m["outputs"] = run.outputs;
    std::ofstream(run.out / (run.sub + ".manifest.json")) << m.dump(2) << "\n";
}

std::uint64_t seed_of(Run& run, Fields& f) {
    if (run.seed_flag) {
        run.effective["seed"] = *run.seed_flag;
        return *run.seed_flag;
    }
    return f.seed("seed");
}

void execute(Run& run) {
    ordered_json& eff = run.effective;
    Fields top(run.config, eff, "");
    const std::string& sub = run.sub;
    std::string section = sub;
    for (auto& c : section)
        if (c == '-') c = '_';
    top.reject_unknown({"masses", "h", "rtol", "seed", "threads", section.c_str()});

    auto m = top.vec("masses", 3, std::vector<double>{1, 1, 1});
    for (int i = 0; i < 3; ++i)
        if (!(m[i] > 0)) throw ConfigError{"/masses/" + std::to_string(i), "must be positive"};
    double h = top.number("h", 1.0);
    top.positive("h", h);
    double rtol = top.number("rtol", 1e-10);
    top.tolerance("rtol", rtol);
    if (top.has("threads")) {
        int t = int(top.integer("threads", 1, 1, 1024));
        if (!run.threads_flag) run.threads = t;
    }

    ordered_json sec_eff = ordered_json::object();
    ordered_json sec_src = top.has(section) ? run.config[section] : ordered_json();
    Fields f(sec_src, sec_eff, "/" + section);

    Masses mh;
    check(brk_masses_create(m[0], m[1], m[2], &mh.h));
    Result res;
    int code = exit_ok;

    if (sub == "potential-grid") {
        f.reject_unknown({"n"});
        int n = int(f.integer("n", 101, 2, 4001));
        eff[section] = sec_eff;
        check(brk_potential_grid(mh.h, n, &res.r));
    } else if (sub == "integrate") {
        f.reject_unknown({"x", "y", "t_end", "samples", "newtonian_check"});
        double x = f.number("x", std::nullopt), y = f.number("y", std::nullopt);
        if (!(x * x + y * y < 1)) throw ConfigError{f.at("x"), "(x, y) must lie in the open unit disk"};
        double t_end = f.number("t_end", 1.0);
        f.positive("t_end", t_end);
        int n = int(f.integer("samples", 101, 2, 1000000));
        bool nc = f.boolean("newtonian_check", false);
        eff[section] = sec_eff;
        check(brk_integrate_brake(mh.h, h, x, y, t_end, n, rtol, nc, &res.r));
    } else if (sub == "syzygy-map") {
        f.reject_unknown({"samples", "exclude"});
        long long n = f.integer("samples", 1000, 1, 100000000);
        double ex = f.number("exclude", 0.02);
        if (!(ex >= 0 && ex < 0.5)) throw ConfigError{f.at("exclude"), "must lie in [0, 0.5)"};
        eff[section] = sec_eff;
        auto seed = seed_of(run, top);
        check(brk_syzygy_map(mh.h, h, std::size_t(n), seed, ex, rtol, run.threads, &res.r));
    } else if (sub == "image-scan") {
        f.reject_unknown({"n_lat", "n_lon"});
        int nl = int(f.integer("n_lat", 20, 1, 100000)), no = int(f.integer("n_lon", 36, 1, 100000));
        eff[section] = sec_eff;
        check(brk_image_scan(mh.h, h, nl, no, rtol, run.threads, &res.r));
    } else if (sub == "winding") {
        f.reject_unknown({"radius", "samples"});
        double rad = f.number("radius", 0.05);
        if (!(rad > 0 && rad < 1)) throw ConfigError{f.at("radius"), "must lie in (0, 1)"};
        int n = int(f.integer("samples", 64, 8, 1000000));
        eff[section] = sec_eff;
        check(brk_winding(mh.h, h, rad, n, run.threads, &res.r));
    } else if (sub == "restpoints") {
        f.reject_unknown({});
        check(brk_restpoints(mh.h, h, &res.r));
    } else if (sub == "spiraling-scan") {
        f.reject_unknown({"n"});
        int n = int(f.integer("n", 30, 3, 2000));
        eff[section] = sec_eff;
        check(brk_spiraling_scan(n, run.threads, &res.r));
    } else if (sub == "iso-branches") {
        f.reject_unknown({"m3", "samples"});
        double m3 = f.number("m3", 1.0);
        f.positive("m3", m3);
        int n = int(f.integer("samples", 400, 2, 1000000));
        eff[section] = sec_eff;
        check(brk_iso_branches(m3, rtol, n, &res.r));
    } else if (sub == "iso-admissible") {
        f.reject_unknown({"m3", "threshold"});
        std::vector<double> ms;
        if (!f.has("m3")) {
            ms = {1.0};
        } else if (f.raw("m3").is_number()) {
            ms = {f.raw("m3").get<double>()};
        } else if (f.raw("m3").is_array()) {
            for (std::size_t i = 0; i < f.raw("m3").size(); ++i) {
                const auto& v = f.raw("m3")[i];
                if (!v.is_number()) throw ConfigError{f.at("m3") + "/" + std::to_string(i), "must be a number"};
                ms.push_back(v.get<double>());
            }
        } else {
            throw ConfigError{f.at("m3"), "must be a number or an array of numbers"};
        }
        if (ms.empty()) throw ConfigError{f.at("m3"), "must not be empty"};
        for (std::size_t i = 0; i < ms.size(); ++i)
            if (!(ms[i] > 0)) throw ConfigError{f.at("m3") + "/" + std::to_string(i), "must be positive"};
        sec_eff["m3"] = ms.size() == 1 ? ordered_json(ms[0]) : ordered_json(ms);
        std::optional<std::array<double, 3>> thr;
        if (f.has("threshold")) {
            ordered_json te = ordered_json::object();
            Fields tf(f.raw("threshold"), te, f.at("threshold"));
            tf.reject_unknown({"lo", "hi", "tol"});
            double lo = tf.number("lo", std::nullopt), hi = tf.number("hi", std::nullopt);
            double tol = tf.number("tol", 1e-4);
            if (!(lo > 0)) throw ConfigError{tf.at("lo"), "must be positive"};
            if (!(hi > lo)) throw ConfigError{tf.at("hi"), "must exceed lo"};
            tf.positive("tol", tol);
            sec_eff["threshold"] = te;
            thr = std::array<double, 3>{lo, hi, tol};
        }
        eff[section] = sec_eff;
        check(brk_iso_admissible(ms.data(), ms.size(), rtol, run.threads, &res.r));
        if (thr) {
            Result tr;
            check(brk_iso_threshold((*thr)[0], (*thr)[1], (*thr)[2], rtol, &tr.r));
            write_file(run, sub + "_threshold.json", std::string(brk_result_summary(tr.r)) + "\n", std::size_t(-1));
        }
    } else if (sub == "iso-periodic") {
        f.reject_unknown({"m3", "grid"});
        double m3 = f.number("m3", 1.0);
        f.positive("m3", m3);
        int grid = int(f.integer("grid", 200, 4, 100000));
        eff[section] = sec_eff;
        check(brk_iso_periodic(m3, grid, rtol, run.threads, &res.r));
    } else if (sub == "jm-minimize") {
        f.reject_unknown({"start", "end", "end_guess", "N", "multistart", "grad_tol", "perturbation",
                          "collision_offset", "offset_study"});
        brk_jm_params p;
        brk_jm_params_default(&p);
        auto st = f.vec("start", 3, std::nullopt);
        std::copy(st.begin(), st.end(), p.start);
        if (f.has("end")) {
            auto en = f.vec("end", 3, std::nullopt);
            std::copy(en.begin(), en.end(), p.end);
            p.fixed_end = 1;
        }
        if (f.has("end_guess")) {
            if (p.fixed_end) throw ConfigError{f.at("end_guess"), "not allowed together with end"};
            auto g = f.vec("end_guess", 2, std::nullopt);
            p.end_guess[0] = g[0];
            p.end_guess[1] = g[1];
            p.has_end_guess = 1;
        }
        p.N = int(f.integer("N", 64, 4, 1000000));
        p.multistart = int(f.integer("multistart", p.multistart, 0, 10000));
        p.grad_tol = f.number("grad_tol", p.grad_tol);
        f.tolerance("grad_tol", p.grad_tol);
        p.perturbation = f.number("perturbation", p.perturbation);
        if (!(p.perturbation >= 0)) throw ConfigError{f.at("perturbation"), "must be non-negative"};
        p.collision_offset = f.number("collision_offset", p.collision_offset);
        f.positive("collision_offset", p.collision_offset);
        p.offset_study = f.boolean("offset_study", false);
        eff[section] = sec_eff;
        p.seed = seed_of(run, top);
        p.threads = run.threads;
        check(brk_jm_minimize(mh.h, h, &p, &res.r));
    } else if (sub == "seifert-probe") {
        f.reject_unknown({"x", "y", "t"});
        double x = f.number("x", 0.2), y = f.number("y", 0.1);
        if (!(x * x + y * y < 1)) throw ConfigError{f.at("x"), "(x, y) must lie in the open unit disk"};
        double t = f.number("t", 1e-3);
        f.positive("t", t);
        eff[section] = sec_eff;
        check(brk_seifert_probe(mh.h, h, x, y, t, &res.r));
    } else if (sub == "verify-all") {
        f.reject_unknown({"criteria"});
        std::vector<int> ids;
        if (f.has("criteria")) {
            const auto& c = f.raw("criteria");
            if (!c.is_array()) throw ConfigError{f.at("criteria"), "must be an array of integers"};
            for (std::size_t i = 0; i < c.size(); ++i) {
                bool known = false;
                if (c[i].is_number_integer())
                    for (std::size_t k = 0; k < brk_criterion_count(); ++k) known = known || brk_criterion_id(k) == c[i];
                if (!known) throw ConfigError{f.at("criteria") + "/" + std::to_string(i), "unknown criterion id"};
                ids.push_back(c[i].get<int>());
            }
            sec_eff["criteria"] = ids;
        }
        eff[section] = sec_eff;
        auto seed = seed_of(run, top);
        struct Collect {
            std::ostringstream csv;
            std::size_t rows = 0;
        } col;
        col.csv << "id,pass,seconds\n";
        int failed = 0;
        auto cb = [](int id, const char*, int pass, double seconds, const char* line, void* user) {
            auto* c = static_cast<Collect*>(user);
            std::cout << line << std::endl;
            c->csv << id << "," << pass << "," << fmt17(seconds) << "\n";
            ++c->rows;
        };
        check(brk_verify(ids.empty() ? nullptr : ids.data(), ids.size(), seed, run.threads, cb, &col, &failed));
        write_file(run, sub + ".csv", col.csv.str(), col.rows);
        std::cout << (failed ? std::to_string(failed) + " criteria failed" : "all criteria passed") << std::endl;
        if (failed) code = exit_acceptance;
    }
    run.hash = config_hash(eff);
    if (res.r) emit(run, res.r);
    if (code != exit_ok) throw code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Brake orbit and syzygy toolkit"};
    app.set_version_flag("--version", std::string(brk_version()));
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::string out_dir = ".";
    int threads = 0;
    std::uint64_t seed = 0;
    app.add_option("--config", config_path, "JSON run configuration");
    app.add_option("--out", out_dir, "output directory");
    auto* thr_opt = app.add_option("--threads", threads, "worker threads")->check(CLI::Range(1, 1024));
    auto* seed_opt = app.add_option("--seed", seed, "random seed, overrides the config");

    const char* subs[] = {"potential-grid", "integrate",      "syzygy-map",    "image-scan",   "winding",
                          "restpoints",     "spiraling-scan", "iso-branches",  "iso-admissible", "iso-periodic",
                          "jm-minimize",    "seifert-probe",  "verify-all"};
    for (auto s : subs) app.add_subcommand(s);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : exit_config;
    }

    Run run;
    run.sub = app.get_subcommands().front()->get_name();
    run.out = out_dir;
    if (seed_opt->count()) run.seed_flag = seed;

    auto started = std::chrono::steady_clock::now();
    auto wall = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count(); };

    try {
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw ConfigError{"--config", "cannot open " + config_path};
            try {
                run.config = ordered_json::parse(in);
            } catch (const nlohmann::json::parse_error& e) {
                throw ConfigError{"--config", e.what()};
            }
            if (!run.config.is_object()) throw ConfigError{"/", "config must be a JSON object"};
        } else {
            run.config = ordered_json::object();
        }
        std::error_code ec;
        fs::create_directories(run.out, ec);
        if (ec) throw ConfigError{"--out", ec.message()};
        if (thr_opt->count()) {
            run.threads = threads;
            run.threads_flag = true;
        }
        execute(run);
        write_manifest(run, wall(), exit_ok, "");
        return exit_ok;
    } catch (const ConfigError& e) {
        std::cerr << "config error at " << e.path << ": " << e.message << "\n";
        return exit_config;
    } catch (const Failure& e) {
        if (e.status == BRK_E_INVALID_ARGUMENT) {
            std::cerr << "config error: " << e.message << "\n";
            return exit_config;
        }
        if (run.hash.empty()) run.hash = config_hash(run.effective);
        ordered_json d;
        d["subcommand"] = run.sub;
        d["status"] = brk_status_name(e.status);
        d["code"] = int(e.status);
        d["message"] = e.message;
        d["config_hash"] = run.hash;
        d["effective_config"] = run.effective;
        write_file(run, run.sub + ".diagnostic.json", d.dump(2) + "\n", std::size_t(-1));
        write_manifest(run, wall(), exit_numerical, e.message);
        std::cerr << "numerical failure (" << brk_status_name(e.status) << "): " << e.message << "\n";
        return exit_numerical;
    } catch (int code) {
        write_manifest(run, wall(), code, "acceptance failure");
        return code;
    }
}
