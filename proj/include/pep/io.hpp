#pragma once

// JSON problem-file schema and report serialization. Field elements travel
// as exact decimal-free rational strings {"a":"p/q","b":"r/s"}; problem
// files round-trip bit-exactly.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pep/errors.hpp"
#include "pep/field.hpp"
#include "pep/lattice.hpp"
#include "pep/matrixgroups.hpp"
#include "pep/pep.hpp"

namespace pep {

using Json = nlohmann::ordered_json;

inline constexpr const char* kLibraryVersion = "0.1.0";

// ---- primitives ----------------------------------------------------------------

inline std::string rational_str(const mpq_class& q) { return q.get_str(); }

inline mpq_class parse_rational(const std::string& s) {
    mpq_class q;
    if (s.empty() || s.find('.') != std::string::npos || mpq_set_str(q.get_mpq_t(), s.c_str(), 10) != 0)
        throw ParseError("bad rational '" + s + "'");
    q.canonicalize();
    return q;
}

inline Json field_to_json(const FieldDescriptor& f) {
    Json j;
    j["kind"] = f.is_rational() ? "rational" : "quadratic";
    if (!f.is_rational()) j["d"] = f.d;
    return j;
}

inline FieldDescriptor parse_field(const Json& j) {
    if (!j.contains("kind")) throw ParseError("field: missing kind");
    std::string kind = j["kind"].get<std::string>();
    if (kind == "rational") return FieldDescriptor::rational();
    if (kind == "quadratic") {
        if (!j.contains("d")) throw ParseError("field: quadratic needs d");
        try {
            return FieldDescriptor::quadratic(j["d"].get<long>());
        } catch (const UnsupportedFieldError&) {
            throw;
        }
    }
    throw ParseError("field: unknown kind '" + kind + "'");
}

inline Json elem_to_json(const FieldElement& x) {
    Json j;
    j["a"] = rational_str(x.a());
    j["b"] = rational_str(x.b());
    return j;
}

inline FieldElement parse_elem(const Json& j, const FieldDescriptor& f) {
    if (!j.contains("a")) throw ParseError("element: missing a");
    mpq_class a = parse_rational(j["a"].get<std::string>());
    mpq_class b = j.contains("b") ? parse_rational(j["b"].get<std::string>()) : mpq_class(0);
    return FieldElement(f, a, b);
}

// ---- PEP problem files -----------------------------------------------------------

inline Json pep_to_json(const PepVector& f) {
    Json j;
    j["field"] = field_to_json(f.field);
    Json bases = Json::array();
    for (const auto& b : f.bases) bases.push_back(elem_to_json(b));
    j["bases"] = bases;
    j["variables"] = f.variables;
    Json comps = Json::array();
    for (const auto& c : f.components) {
        Json jc;
        Json terms = Json::array();
        for (const auto& t : c.terms) {
            Json jt;
            jt["coeff"] = elem_to_json(t.coeff);
            Json rows = Json::array();
            for (size_t i = 0; i < t.exponents.rows(); ++i) {
                Json row = Json::array();
                for (size_t k = 0; k < t.exponents.cols(); ++k) {
                    const mpz_class& e = t.exponents.at(i, k);
                    if (!e.fits_slong_p()) throw CapError("exponent too large for problem file");
                    row.push_back(e.get_si());
                }
                rows.push_back(row);
            }
            jt["exponents"] = rows;
            terms.push_back(jt);
        }
        jc["terms"] = terms;
        comps.push_back(jc);
    }
    j["components"] = comps;
    return j;
}

inline PepVector parse_pep(const Json& j) try {
    if (!j.contains("field") || !j.contains("bases") || !j.contains("variables") || !j.contains("components"))
        throw ParseError("problem file: missing field/bases/variables/components");
    FieldDescriptor f = parse_field(j["field"]);
    std::vector<FieldElement> bases;
    for (const auto& jb : j["bases"]) bases.push_back(parse_elem(jb, f));
    size_t r = j["variables"].get<size_t>();
    std::vector<PepPolynomial> comps;
    for (const auto& jc : j["components"]) {
        PepPolynomial c;
        if (!jc.contains("terms")) throw ParseError("component: missing terms");
        for (const auto& jt : jc["terms"]) {
            PepTerm t;
            t.coeff = parse_elem(jt.at("coeff"), f);
            const auto& rows = jt.at("exponents");
            if (rows.size() != bases.size()) throw ParseError("term: exponent row count != base count");
            IntMatrix m(bases.size(), r);
            for (size_t i = 0; i < rows.size(); ++i) {
                if (rows[i].size() != r) throw ParseError("term: exponent row length != variables");
                for (size_t k = 0; k < r; ++k) m.at(i, k) = mpz_class(rows[i][k].get<long>());
            }
            t.exponents = m;
            c.terms.push_back(t);
        }
        comps.push_back(c);
    }
    try {
        return make_pep_vector(f, bases, r, comps);
    } catch (const std::invalid_argument& e) {
        throw ParseError(std::string("invalid problem: ") + e.what());
    }
} catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("problem file: ") + e.what());
}

// ---- matrices ---------------------------------------------------------------------

inline Json matrix_to_json(const MatrixOverField& m) {
    Json rows = Json::array();
    for (size_t i = 0; i < m.dim(); ++i) {
        Json row = Json::array();
        for (size_t j = 0; j < m.dim(); ++j) row.push_back(elem_to_json(m.at(i, j)));
        rows.push_back(row);
    }
    return rows;
}

inline std::vector<MatrixOverField> parse_matrices(const Json& j) try {
    if (!j.contains("field") || !j.contains("matrices")) throw ParseError("matrix file: missing field/matrices");
    FieldDescriptor f = parse_field(j["field"]);
    std::vector<MatrixOverField> out;
    for (const auto& jm : j["matrices"]) {
        size_t n = jm.size();
        MatrixOverField m(f, n);
        for (size_t i = 0; i < n; ++i) {
            if (jm[i].size() != n) throw ParseError("matrix not square");
            for (size_t k = 0; k < n; ++k) m.at(i, k) = parse_elem(jm[i][k], f);
        }
        out.push_back(m);
    }
    if (out.empty()) throw ParseError("matrix file: no matrices");
    return out;
} catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("matrix file: ") + e.what());
}

// ---- cosets -----------------------------------------------------------------------

inline Json coset_to_json(const Coset& c) {
    Json j;
    Json off = Json::array();
    for (const auto& x : c.offset) off.push_back(x.get_str());
    j["offset"] = off;
    Json basis = Json::array();
    for (size_t i = 0; i < c.lattice.rank(); ++i) {
        Json row = Json::array();
        for (size_t k = 0; k < c.ambient_rank(); ++k) row.push_back(c.lattice.basis().at(i, k).get_str());
        basis.push_back(row);
    }
    j["basis"] = basis;
    return j;
}

inline Coset parse_coset(const Json& j) try {
    ZVec off;
    for (const auto& x : j.at("offset")) off.emplace_back(x.get<std::string>());
    std::vector<ZVec> rows;
    for (const auto& r : j.at("basis")) {
        ZVec row;
        for (const auto& x : r) row.emplace_back(x.get<std::string>());
        rows.push_back(row);
    }
    return Coset(off, Lattice::from_rows(off.size(), rows));
} catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("coset: ") + e.what());
}

// ---- file helpers -------------------------------------------------------------------

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline Json parse_json_text(const std::string& text) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        size_t line = 1, col = 1;
        for (size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ParseError("JSON parse error at line " + std::to_string(line) + ", column " +
                         std::to_string(col) + ": " + e.what());
    }
}

inline std::string fnv1a_hex(const std::string& bytes) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

}  // namespace pep
