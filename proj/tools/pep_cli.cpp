// Batch front end: parse problem files, dispatch analyses, emit
// deterministic CSV/JSON reports.
//
// Exit codes: 0 ok, 2 parse error, 3 unsupported field, 4 cap exceeded,
// 5 diagnostic failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pep/counting.hpp"
#include "pep/heightnorm.hpp"
#include "pep/io.hpp"
#include "pep/matrixgroups.hpp"
#include "pep/multiplicative.hpp"
#include "pep/pep.hpp"
#include "pep/reduction.hpp"

namespace {

using namespace pep;

struct Options {
    std::string input;
    long box = 10;
    std::string thresholds = "1000:1000:4";  // T0:factor:count
    int precision = 128;
    unsigned threads = 1;
    uint64_t seed = 12345;
    std::string out;
    std::string format = "json";
    int lmax = 8;
};

std::vector<double> parse_thresholds(const std::string& spec) {
    double t0 = 0, factor = 0;
    int count = 0;
    if (sscanf(spec.c_str(), "%lf:%lf:%d", &t0, &factor, &count) != 3 || t0 <= 1 || factor <= 1 || count < 1)
        throw ParseError("bad --thresholds, expected T0:factor:count");
    std::vector<double> ts;
    double t = t0;
    for (int i = 0; i < count; ++i) {
        ts.push_back(t);
        t *= factor;
    }
    return ts;
}

void emit(const Options& o, const std::string& text) {
    if (o.out.empty()) {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << "\n";
        return;
    }
    std::ofstream f(o.out, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write '" + o.out + "'");
    f << text;
}

std::string fmt_double(double x) {
    char buf[64];
    snprintf(buf, sizeof buf, "%.12g", x);
    return std::string(buf);
}

Json report_header(const std::string& input_bytes) {
    Json j;
    j["version"] = kLibraryVersion;
    j["input_hash"] = fnv1a_hex(input_bytes);
    return j;
}

Json lattice_to_json(const Lattice& L) {
    Json rows = Json::array();
    for (size_t i = 0; i < L.rank(); ++i) {
        Json row = Json::array();
        for (size_t j = 0; j < L.ambient_rank(); ++j) row.push_back(L.basis().at(i, j).get_str());
        rows.push_back(row);
    }
    return rows;
}

struct CountBundle {
    CountReport report;
    double c_hat = 0;
    double volume_prediction = 0;
    double ratio = 0;
    std::optional<FitResult> fit;
};

CountBundle run_count(const PepVector& f, const Options& o) {
    CountBundle b;
    CountOptions co;
    co.fallback_box = o.box;
    co.threads = o.threads;
    std::vector<double> ts = parse_thresholds(o.thresholds);
    b.report = count_by_height(f, ts, co);
    if (ts.size() >= 4) {
        b.fit = fit_asymptotic(b.report);
        b.c_hat = b.fit->c_hat;
    } else {
        size_t from = ts.size() / 2;
        double sum = 0;
        for (size_t i = from; i < ts.size(); ++i)
            sum += b.report.counts[i] / std::pow(std::log(ts[i]), double(b.report.exact_rank));
        b.c_hat = sum / (ts.size() - from);
    }
    // volume prediction: sum of norm-ball volumes over the maximal-rank
    // reduced pieces (the reduced-case constant; fiber combinatorics not
    // folded in)
    ReducedDecomposition rd = reduced_decomposition(f);
    size_t rmax = 0;
    for (const auto& p : rd.pieces) rmax = std::max(rmax, p.reduced.variables);
    if (rmax > 0) {
        for (const auto& p : rd.pieces) {
            if (p.reduced.variables != rmax) continue;
            try {
                HeightSeminorm N = build_height_seminorm(p.reduced);
                b.volume_prediction += unit_ball_volume(N, 200000, o.seed).value;
            } catch (const CapError&) {
            }
        }
    }
    b.ratio = b.volume_prediction > 0 ? b.c_hat / b.volume_prediction : 0;
    return b;
}

std::string count_csv(const CountReport& r) {
    std::ostringstream ss;
    ss << "T,N,certified\n";
    for (size_t i = 0; i < r.thresholds.size(); ++i)
        ss << fmt_double(r.thresholds[i]) << "," << r.counts[i] << "," << (r.certified ? 1 : 0) << "\n";
    return ss.str();
}

Json count_json(const std::string& bytes, const CountBundle& b) {
    Json j = report_header(bytes);
    j["certified"] = b.report.certified;
    j["box_radius"] = b.report.box_radius;
    Json rows = Json::array();
    for (size_t i = 0; i < b.report.thresholds.size(); ++i) {
        Json row;
        row["T"] = b.report.thresholds[i];
        row["N"] = b.report.counts[i];
        row["certified"] = b.report.certified;
        rows.push_back(row);
    }
    j["rows"] = rows;
    Json s;
    s["rank"] = b.report.exact_rank;
    s["c_hat"] = b.c_hat;
    s["volume_prediction"] = b.volume_prediction;
    s["ratio"] = b.ratio;
    j["summary"] = s;
    return j;
}

int run(const std::string& cmd, const Options& o) {
    Real::set_default_precision(o.precision);
    std::string bytes = o.input.empty() ? std::string() : read_file(o.input);

    if (cmd == "reduce") {
        PepVector f = parse_pep(parse_json_text(bytes));
        PepVector c = canonicalize(f);
        ReducedDecomposition rd = reduced_decomposition(c);
        Json j = report_header(bytes);
        j["canonical"] = pep_to_json(c);
        Json pieces = Json::array();
        for (const auto& p : rd.pieces) {
            Json jp;
            jp["coset"] = coset_to_json(p.coset);
            jp["pep"] = pep_to_json(p.reduced);
            Json proj;
            Json off = Json::array();
            for (const auto& x : p.proj.offset) off.push_back(x.get_str());
            proj["offset"] = off;
            proj["modulus"] = p.proj.modulus;
            Json q = Json::array();
            for (size_t i = 0; i < p.proj.Q.rows(); ++i) {
                Json row = Json::array();
                for (size_t k = 0; k < p.proj.Q.cols(); ++k) row.push_back(p.proj.Q.at(i, k).get_str());
                q.push_back(row);
            }
            proj["matrix"] = q;
            jp["projection"] = proj;
            pieces.push_back(jp);
        }
        j["pieces"] = pieces;
        emit(o, j.dump(2));
        return 0;
    }
    if (cmd == "rank") {
        PepVector f = parse_pep(parse_json_text(bytes));
        Json j = report_header(bytes);
        j["rank"] = pep_rank(f);
        emit(o, j.dump(2));
        return 0;
    }
    if (cmd == "norm") {
        PepVector f = canonicalize(parse_pep(parse_json_text(bytes)));
        HeightSeminorm N = build_height_seminorm(f);
        VolumeResult vol;
        bool have_vol = true;
        try {
            vol = unit_ball_volume(N, 1000000, o.seed);
        } catch (const std::invalid_argument&) {
            have_vol = false;  // zero-dimensional quotient
        }
        Json j = report_header(bytes);
        Json forms = Json::array();
        for (const auto& pf : N.places) {
            Json jf;
            jf["place"] = pf.place.str();
            Json rows = Json::array();
            if (pf.finite) {
                for (const auto& row : pf.rational_rows) {
                    Json r = Json::array();
                    for (const auto& q : row) r.push_back(rational_str(q));
                    rows.push_back(r);
                }
                jf["unit"] = "log " + pf.place.p.get_str();
            } else {
                for (const auto& row : pf.real_rows) {
                    Json r = Json::array();
                    for (const auto& x : row) r.push_back(x.to_double());
                    rows.push_back(r);
                }
            }
            jf["rows"] = rows;
            forms.push_back(jf);
        }
        j["forms"] = forms;
        j["kernel_basis"] = lattice_to_json(N.kernel);
        j["volume"] = have_vol ? vol.value : 0.0;
        j["volume_error"] = have_vol ? vol.std_error : 0.0;
        j["volume_exact_cells"] = have_vol && vol.exact;
        emit(o, j.dump(2));
        return 0;
    }
    if (cmd == "count" || cmd == "fit") {
        PepVector f = parse_pep(parse_json_text(bytes));
        CountBundle b = run_count(f, o);
        if (o.format == "csv") {
            emit(o, count_csv(b.report));
        } else {
            Json j = count_json(bytes, b);
            if (cmd == "fit" && b.fit) {
                Json jf;
                jf["slope"] = b.fit->slope;
                jf["rprime_hat"] = b.fit->rprime_hat;
                jf["diagnostic_ok"] = b.fit->diagnostic_ok;
                j["fit"] = jf;
            }
            emit(o, j.dump(2));
        }
        if (cmd == "fit") {
            if (!b.fit) throw ParseError("fit needs >= 4 thresholds");
            if (!b.fit->diagnostic_ok) return 5;
        }
        return 0;
    }
    if (cmd == "zeros") {
        PepVector f = parse_pep(parse_json_text(bytes));
        ZeroLocusReport rep = empirical_zero_locus(f, o.box);
        Json j = report_header(bytes);
        j["box_radius"] = o.box;
        j["witness_count"] = rep.witnesses.size();
        Json cs = Json::array();
        for (const auto& c : rep.verified_cosets) cs.push_back(coset_to_json(c));
        j["verified_cosets"] = cs;
        Json un = Json::array();
        for (const auto& w : rep.uncovered) {
            Json row = Json::array();
            for (const auto& x : w) row.push_back(x.get_str());
            un.push_back(row);
        }
        j["uncovered_witnesses"] = un;
        emit(o, j.dump(2));
        return 0;
    }
    if (cmd == "fibers") {
        Json root = parse_json_text(bytes);
        if (!root.contains("f") || !root.contains("g")) throw ParseError("fibers input needs top-level f and g");
        PepVector f = parse_pep(root["f"]);
        PepVector g = parse_pep(root["g"]);
        FiberOptions fo;
        fo.threads = o.threads;
        FiberReport rep = fiber_statistics(f, g, o.box, fo);
        Json j = report_header(bytes);
        j["modulus"] = rep.modulus;
        j["certified"] = rep.certified;
        j["g_box"] = rep.g_box;
        Json classes = Json::array();
        for (const auto& [cls, cnt] : rep.class_counts) {
            Json jc;
            Json res = Json::array();
            for (long x : cls) res.push_back(x);
            jc["class"] = res;
            jc["fiber_count"] = cnt;
            classes.push_back(jc);
        }
        j["classes"] = classes;
        Json viol = Json::array();
        for (const auto& v : rep.violations) {
            Json row = Json::array();
            for (const auto& x : v) row.push_back(x.get_str());
            viol.push_back(row);
        }
        j["violations"] = viol;
        Json exc = Json::array();
        for (const auto& c : rep.excluded_candidates) exc.push_back(coset_to_json(c));
        j["excluded_candidates"] = exc;
        emit(o, j.dump(2));
        return 0;
    }
    if (cmd == "partition") {
        PepVector f = parse_pep(parse_json_text(bytes));
        auto pieces = partition_report(f, o.box);
        Json j = report_header(bytes);
        Json arr = Json::array();
        for (const auto& p : pieces) {
            Json jp;
            jp["degeneracy_type"] = p.type.key();
            jp["coset"] = coset_to_json(p.coset);
            Json exc = Json::array();
            for (const auto& c : p.excluded) exc.push_back(coset_to_json(c));
            jp["excluded"] = exc;
            jp["stabilizer"] = lattice_to_json(p.stab);
            jp["points"] = p.points;
            jp["constant_height"] = p.constant_height;
            if (!p.constant_height) {
                jp["ratio_min"] = p.ratio_min;
                jp["ratio_max"] = p.ratio_max;
            }
            arr.push_back(jp);
        }
        j["pieces"] = arr;
        emit(o, j.dump(2));
        return 0;
    }
    if (cmd == "bg") {
        std::vector<MatrixOverField> mats = parse_matrices(parse_json_text(bytes));
        BgSpec spec = make_bg_spec(mats);
        PepVector f = bg_to_pep(spec);
        Json j = pep_to_json(f);
        emit(o, j.dump(2));
        return 0;
    }
    if (cmd == "sl2-baseline") {
        std::vector<double> ts = parse_thresholds(o.thresholds);
        std::vector<long long> counts;
        for (double t : ts) counts.push_back(sl2z_ball_count(static_cast<long>(t), o.threads));
        if (o.format == "csv") {
            std::ostringstream ss;
            ss << "T,count\n";
            for (size_t i = 0; i < ts.size(); ++i) ss << fmt_double(ts[i]) << "," << counts[i] << "\n";
            emit(o, ss.str());
            return 0;
        }
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (size_t i = 0; i < ts.size(); ++i) {
            double x = std::log(ts[i]), y = std::log(static_cast<double>(counts[i]));
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        double n = static_cast<double>(ts.size());
        double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        Json j = report_header(o.thresholds);
        Json rows = Json::array();
        for (size_t i = 0; i < ts.size(); ++i) {
            Json row;
            row["T"] = ts[i];
            row["count"] = counts[i];
            rows.push_back(row);
        }
        j["rows"] = rows;
        j["fitted_exponent"] = slope;
        emit(o, j.dump(2));
        return 0;
    }
    if (cmd == "sparseness") {
        PepVector f = parse_pep(parse_json_text(bytes));
        std::vector<double> ts = parse_thresholds(o.thresholds);
        std::vector<long long> ambient;
        for (double t : ts) ambient.push_back(sl2z_ball_count(static_cast<long>(t), o.threads));
        CountOptions co;
        co.fallback_box = o.box;
        co.threads = o.threads;
        SparsenessReport rep = sparseness_report(f, ts, ambient, co);
        if (o.format == "csv") {
            std::ostringstream ss;
            ss << "T,pep_count,ambient_count,ratio\n";
            for (size_t i = 0; i < ts.size(); ++i)
                ss << fmt_double(ts[i]) << "," << rep.pep_counts[i] << "," << rep.ambient_counts[i] << ","
                   << fmt_double(rep.ratios[i]) << "\n";
            emit(o, ss.str());
            return 0;
        }
        Json j = report_header(bytes);
        Json rows = Json::array();
        for (size_t i = 0; i < ts.size(); ++i) {
            Json row;
            row["T"] = ts[i];
            row["pep_count"] = rep.pep_counts[i];
            row["ambient_count"] = rep.ambient_counts[i];
            row["ratio"] = rep.ratios[i];
            rows.push_back(row);
        }
        j["rows"] = rows;
        j["decreasing"] = rep.decreasing;
        emit(o, j.dump(2));
        return 0;
    }
    if (cmd == "words") {
        std::vector<MatrixOverField> mats = parse_matrices(parse_json_text(bytes));
        if (mats.size() != 2) throw ParseError("words needs exactly two matrices");
        WordGrowthReport rep = free_word_growth(mats[0], mats[1], o.lmax);
        if (o.format == "csv") {
            std::ostringstream ss;
            ss << "l,distinct,max_height\n";
            for (const auto& lv : rep.levels)
                ss << lv.length << "," << lv.distinct_cumulative << "," << fmt_double(lv.max_height) << "\n";
            emit(o, ss.str());
            return 0;
        }
        Json j = report_header(bytes);
        Json rows = Json::array();
        for (const auto& lv : rep.levels) {
            Json row;
            row["l"] = lv.length;
            row["distinct"] = lv.distinct_cumulative;
            row["max_height"] = lv.max_height;
            rows.push_back(row);
        }
        j["rows"] = rows;
        j["generator_height"] = rep.generator_height;
        j["delta"] = rep.delta;
        j["height_bound_ok"] = rep.height_bound_ok;
        emit(o, j.dump(2));
        return 0;
    }
    throw ParseError("unknown command " + cmd);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact PEP toolkit: reduction, heights, counting"};
    app.require_subcommand(1);
    Options o;

    std::vector<std::string> with_input = {"reduce", "rank",      "norm",   "count", "fit",
                                           "zeros",  "fibers",    "partition", "bg", "sparseness", "words"};
    std::vector<std::string> no_input = {"sl2-baseline"};
    std::vector<CLI::App*> subs;
    for (const auto& name : with_input) {
        CLI::App* s = app.add_subcommand(name);
        s->add_option("input", o.input, "problem file")->required();
        subs.push_back(s);
    }
    for (const auto& name : no_input) subs.push_back(app.add_subcommand(name));
    for (CLI::App* s : subs) {
        s->add_option("--box", o.box, "enumeration box radius");
        s->add_option("--thresholds", o.thresholds, "T0:factor:count");
        s->add_option("--precision", o.precision, "working precision bits");
        s->add_option("--threads", o.threads, "worker threads");
        s->add_option("--seed", o.seed, "Monte Carlo seed");
        s->add_option("--out", o.out, "output path (default stdout)");
        s->add_option("--format", o.format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
        s->add_option("--lmax", o.lmax, "max word length (words)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    std::string cmd;
    for (CLI::App* s : app.get_subcommands()) cmd = s->get_name();
    try {
        return run(cmd, o);
    } catch (const pep::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const pep::UnsupportedFieldError& e) {
        std::cerr << "unsupported field: " << e.what() << "\n";
        return 3;
    } catch (const pep::CapError& e) {
        std::cerr << "cap exceeded: " << e.what() << "\n";
        return 4;
    } catch (const pep::DiagnosticError& e) {
        std::cerr << "diagnostic failure: " << e.what() << "\n";
        return 5;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
