#include "hetmap/lpformat.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace hetmap {

namespace {

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void append_terms(std::string& out,
                  const std::vector<std::pair<int, double>>& terms,
                  const MilpModel& model) {
    // consolidate duplicates, keeping first-appearance order
    std::vector<std::pair<int, double>> merged;
    std::map<int, size_t> seen;
    for (const auto& [var, coeff] : terms) {
        auto it = seen.find(var);
        if (it == seen.end()) {
            seen[var] = merged.size();
            merged.emplace_back(var, coeff);
        } else {
            merged[it->second].second += coeff;
        }
    }
    bool first = true;
    for (const auto& [var, coeff] : merged) {
        if (coeff == 0.0) continue;
        if (first) {
            if (coeff < 0.0) out += "- ";
            first = false;
        } else {
            out += coeff < 0.0 ? " - " : " + ";
        }
        out += num(std::abs(coeff));
        out += ' ';
        out += model.vars[var].name;
    }
    if (first) out += "0 " + (model.vars.empty() ? std::string("none")
                                                 : model.vars[0].name);
}

} // namespace

std::string export_lp(const MilpModel& model) {
    std::string out;
    out += "\\ hetmap model\n";
    out += "Minimize\n obj: ";
    append_terms(out, model.objective, model);
    out += "\nSubject To\n";
    for (const MilpConstraint& c : model.cons) {
        out += ' ';
        out += c.name;
        out += ": ";
        append_terms(out, c.terms, model);
        switch (c.sense) {
            case MilpConstraint::Sense::LE: out += " <= "; break;
            case MilpConstraint::Sense::EQ: out += " = "; break;
            case MilpConstraint::Sense::GE: out += " >= "; break;
        }
        out += num(c.rhs);
        out += '\n';
    }
    out += "Bounds\n";
    for (const MilpVar& v : model.vars) {
        if (v.kind == MilpVar::Kind::Binary) continue;
        out += ' ';
        if (is_inf(v.hi)) {
            out += v.name + " >= " + num(v.lo);
        } else {
            out += num(v.lo) + " <= " + v.name + " <= " + num(v.hi);
        }
        out += '\n';
    }
    std::string bins;
    for (const MilpVar& v : model.vars) {
        if (v.kind != MilpVar::Kind::Binary) continue;
        if (bins.size() - bins.rfind('\n') + v.name.size() > 78) bins += '\n';
        bins += ' ';
        bins += v.name;
    }
    if (!bins.empty()) {
        out += "Binaries\n";
        out += bins;
        out += '\n';
    }
    out += "End\n";
    return out;
}

void export_lp(const MilpModel& model, const std::string& path) {
    write_text_file(path, export_lp(model));
}

namespace {

struct Token {
    std::string text;
    int line;
};

[[noreturn]] void lp_fail(int line, const std::string& what) {
    throw error("lp parse error at line " + std::to_string(line) + ": " + what);
}

bool is_name_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

bool is_name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' ||
           c == '.' || c == '[' || c == ']';
}

std::vector<Token> tokenize_lp(const std::string& text) {
    std::vector<Token> toks;
    int line = 1;
    size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        if (c == '\n') {
            ++line;
            ++i;
        } else if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else if (c == '\\') {
            while (i < text.size() && text[i] != '\n') ++i;
        } else if (c == ':' || c == '+') {
            toks.push_back({std::string(1, c), line});
            ++i;
        } else if (c == '-') {
            toks.push_back({"-", line});
            ++i;
        } else if (c == '<' || c == '>' || c == '=') {
            std::string op(1, c);
            if (i + 1 < text.size() && text[i + 1] == '=') {
                op += '=';
                ++i;
            }
            if (op == "<") op = "<=";
            if (op == ">") op = ">=";
            toks.push_back({op, line});
            ++i;
        } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            size_t j = i;
            while (j < text.size()) {
                char d = text[j];
                if (std::isdigit(static_cast<unsigned char>(d)) || d == '.') {
                    ++j;
                } else if ((d == 'e' || d == 'E') && j + 1 < text.size() &&
                           (std::isdigit(static_cast<unsigned char>(
                                text[j + 1])) ||
                            ((text[j + 1] == '+' || text[j + 1] == '-') &&
                             j + 2 < text.size() &&
                             std::isdigit(static_cast<unsigned char>(
                                 text[j + 2]))))) {
                    j += 2; // consume 'e' and sign/digit
                } else {
                    break;
                }
            }
            toks.push_back({text.substr(i, j - i), line});
            i = j;
        } else if (is_name_start(c)) {
            size_t j = i;
            while (j < text.size() && is_name_char(text[j])) ++j;
            toks.push_back({text.substr(i, j - i), line});
            i = j;
        } else {
            lp_fail(line, std::string("unexpected character '") + c + "'");
        }
    }
    return toks;
}

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

bool is_number_token(const std::string& t) {
    return !t.empty() && (std::isdigit(static_cast<unsigned char>(t[0])) ||
                          t[0] == '.');
}

double parse_number(const Token& t) {
    std::string l = lower(t.text);
    if (l == "inf" || l == "infinity") return kInf;
    try {
        size_t pos = 0;
        double v = std::stod(t.text, &pos);
        if (pos != t.text.size()) lp_fail(t.line, "bad number " + t.text);
        return v;
    } catch (const std::exception&) {
        lp_fail(t.line, "bad number " + t.text);
    }
}

} // namespace

MilpModel read_lp(const std::string& text) {
    std::vector<Token> toks = tokenize_lp(text);
    MilpModel model;
    std::map<std::string, int> by_name;
    auto var_of = [&](const Token& t) {
        auto it = by_name.find(t.text);
        if (it != by_name.end()) return it->second;
        int id = model.add_continuous(t.text, 0.0, kInf);
        by_name[t.text] = id;
        return id;
    };

    size_t i = 0;
    auto at_end = [&] { return i >= toks.size(); };
    auto peek = [&]() -> const Token& { return toks[i]; };
    auto section_at = [&](size_t k, std::string* out) {
        // recognizes a section keyword starting at token k
        if (k >= toks.size()) return false;
        std::string w = lower(toks[k].text);
        if (w == "minimize" || w == "maximize" || w == "bounds" || w == "end" ||
            w == "binaries" || w == "binary" || w == "bin" || w == "general" ||
            w == "generals" || w == "st") {
            *out = w == "binary" || w == "bin" ? "binaries" : w;
            return true;
        }
        if (w == "subject" && k + 1 < toks.size() &&
            lower(toks[k + 1].text) == "to") {
            *out = "subject to";
            return true;
        }
        return false;
    };

    std::string section;
    if (!section_at(0, &section)) lp_fail(toks.empty() ? 1 : toks[0].line,
                                          "expected Minimize");
    if (section == "maximize")
        lp_fail(toks[0].line, "only Minimize is supported");
    if (section != "minimize") lp_fail(toks[0].line, "expected Minimize");
    i = 1;

    // objective: [label :] terms, until Subject To
    {
        std::string next;
        if (i + 1 < toks.size() && toks[i + 1].text == ":" &&
            !section_at(i, &next))
            i += 2; // skip label
        double sign = 1.0;
        bool pending_sign = false;
        while (!at_end()) {
            std::string sec;
            if (!pending_sign && section_at(i, &sec)) break;
            const Token& t = peek();
            if (t.text == "+") {
                ++i;
                pending_sign = true;
            } else if (t.text == "-") {
                sign = -sign;
                ++i;
                pending_sign = true;
            } else if (is_number_token(t.text)) {
                double coeff = sign * parse_number(t);
                ++i;
                if (at_end() || !is_name_start(peek().text[0]))
                    lp_fail(t.line, "number without variable in objective");
                model.objective.emplace_back(var_of(peek()), coeff);
                ++i;
                sign = 1.0;
                pending_sign = false;
            } else if (is_name_start(t.text[0])) {
                model.objective.emplace_back(var_of(t), sign);
                ++i;
                sign = 1.0;
                pending_sign = false;
            } else {
                lp_fail(t.line, "unexpected token '" + t.text + "' in objective");
            }
        }
        // drop explicit zero-coefficient placeholder terms
        std::vector<std::pair<int, double>> obj;
        for (auto& [v, c] : model.objective)
            if (c != 0.0) obj.emplace_back(v, c);
        model.objective = std::move(obj);
    }

    std::string sec;
    if (at_end() || !section_at(i, &sec) || (sec != "subject to" && sec != "st"))
        lp_fail(at_end() ? 0 : peek().line, "expected Subject To");
    i += lower(toks[i].text) == "subject" ? 2 : 1;

    // constraints until Bounds/Binaries/End
    int anon = 0;
    while (!at_end()) {
        std::string s2;
        if (section_at(i, &s2)) break;
        std::string name;
        int line0 = peek().line;
        if (i + 1 < toks.size() && toks[i + 1].text == ":") {
            name = peek().text;
            i += 2;
        } else {
            name = "c" + std::to_string(anon++);
        }
        MilpConstraint con;
        con.name = name;
        double sign = 1.0;
        bool done_terms = false;
        while (!at_end() && !done_terms) {
            const Token& t = peek();
            if (t.text == "+") {
                ++i;
            } else if (t.text == "-") {
                sign = -sign;
                ++i;
            } else if (t.text == "<=" || t.text == ">=" || t.text == "=") {
                con.sense = t.text == "<="   ? MilpConstraint::Sense::LE
                            : t.text == ">=" ? MilpConstraint::Sense::GE
                                             : MilpConstraint::Sense::EQ;
                ++i;
                done_terms = true;
            } else if (is_number_token(t.text)) {
                double coeff = sign * parse_number(t);
                ++i;
                if (at_end() || !is_name_start(peek().text[0]))
                    lp_fail(t.line, "number without variable in row " + name);
                con.terms.emplace_back(var_of(peek()), coeff);
                ++i;
                sign = 1.0;
            } else if (is_name_start(t.text[0])) {
                con.terms.emplace_back(var_of(t), sign);
                ++i;
                sign = 1.0;
            } else {
                lp_fail(t.line, "unexpected token '" + t.text + "' in row " +
                                    name);
            }
        }
        if (!done_terms) lp_fail(line0, "row " + name + " has no relation");
        if (at_end()) lp_fail(line0, "row " + name + " has no right-hand side");
        double rsign = 1.0;
        while (!at_end() && (peek().text == "-" || peek().text == "+")) {
            if (peek().text == "-") rsign = -rsign;
            ++i;
        }
        if (at_end() || !is_number_token(peek().text))
            lp_fail(line0, "row " + name + " has no right-hand side");
        con.rhs = rsign * parse_number(peek());
        ++i;
        model.cons.push_back(std::move(con));
    }

    // Bounds / Binaries sections in any order
    while (!at_end()) {
        std::string s3;
        if (!section_at(i, &s3)) lp_fail(peek().line, "expected a section");
        i += s3 == "subject to" ? 2 : 1;
        if (s3 == "end") return model;
        if (s3 == "general" || s3 == "generals")
            lp_fail(toks[i - 1].line, "general integers are not supported");
        if (s3 == "bounds") {
            while (!at_end()) {
                std::string s4;
                if (section_at(i, &s4)) break;
                const Token& t = peek();
                // forms: lo <= name <= hi | name >= lo | name <= hi |
                //        name = v | name free | -num <= ...
                double first_sign = 1.0;
                if (t.text == "-") {
                    first_sign = -1.0;
                    ++i;
                }
                if (at_end()) lp_fail(t.line, "truncated bound");
                if (is_number_token(peek().text) ||
                    lower(peek().text) == "inf" ||
                    lower(peek().text) == "infinity") {
                    double lo = first_sign * parse_number(peek());
                    ++i;
                    if (at_end() || peek().text != "<=")
                        lp_fail(t.line, "expected <= in bound");
                    ++i;
                    if (at_end() || !is_name_start(peek().text[0]))
                        lp_fail(t.line, "expected variable in bound");
                    int v = var_of(peek());
                    ++i;
                    model.vars[v].lo = lo;
                    if (!at_end() && peek().text == "<=") {
                        ++i;
                        double hsign = 1.0;
                        if (!at_end() && peek().text == "-") {
                            hsign = -1.0;
                            ++i;
                        }
                        if (at_end()) lp_fail(t.line, "truncated bound");
                        model.vars[v].hi = hsign * parse_number(peek());
                        ++i;
                    }
                } else if (is_name_start(peek().text[0])) {
                    int v = var_of(peek());
                    int line0 = peek().line;
                    ++i;
                    if (!at_end() && lower(peek().text) == "free") {
                        model.vars[v].lo = -kInf;
                        model.vars[v].hi = kInf;
                        ++i;
                        continue;
                    }
                    if (at_end()) lp_fail(line0, "truncated bound");
                    std::string op = peek().text;
                    if (op != "<=" && op != ">=" && op != "=")
                        lp_fail(line0, "expected relation in bound");
                    ++i;
                    double s5 = 1.0;
                    if (!at_end() && peek().text == "-") {
                        s5 = -1.0;
                        ++i;
                    }
                    if (at_end()) lp_fail(line0, "truncated bound");
                    double val = s5 * parse_number(peek());
                    ++i;
                    if (op == "<=") model.vars[v].hi = val;
                    else if (op == ">=") model.vars[v].lo = val;
                    else model.vars[v].lo = model.vars[v].hi = val;
                } else {
                    lp_fail(peek().line, "bad bound line");
                }
            }
        } else if (s3 == "binaries") {
            while (!at_end()) {
                std::string s4;
                if (section_at(i, &s4)) break;
                if (!is_name_start(peek().text[0]))
                    lp_fail(peek().line, "expected variable name");
                int v = var_of(peek());
                model.vars[v].kind = MilpVar::Kind::Binary;
                model.vars[v].lo = 0.0;
                model.vars[v].hi = 1.0;
                ++i;
            }
        } else {
            lp_fail(toks[i - 1].line, "unexpected section " + s3);
        }
    }
    throw error("lp parse error: missing End");
}

MilpModel read_lp_file(const std::string& path) {
    return read_lp(read_text_file(path));
}

std::string export_solution(const Solution& sol, const MilpModel& model) {
    std::string out;
    out += "# hetmap solution\n";
    out += "# status ";
    out += status_name(sol.status);
    out += '\n';
    out += "# objective " + num(sol.objective) + "\n";
    for (const MilpVar& v : model.vars) {
        double x = v.id < static_cast<int>(sol.values.size())
                       ? sol.values[v.id]
                       : 0.0;
        out += v.name + " " + num(x) + "\n";
    }
    return out;
}

void export_solution(const Solution& sol, const MilpModel& model,
                     const std::string& path) {
    write_text_file(path, export_solution(sol, model));
}

Solution import_solution(const std::string& text, const MilpModel& model) {
    std::vector<double> values(model.vars.size(), 0.0);
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string name;
        if (!(ls >> name)) continue; // blank
        double value;
        if (!(ls >> value))
            throw error("solution parse error at line " +
                        std::to_string(lineno) + ": missing value for " + name);
        std::string extra;
        if (ls >> extra)
            throw error("solution parse error at line " +
                        std::to_string(lineno) + ": trailing token " + extra);
        int var = model.var_by_name(name);
        if (var < 0)
            throw error("solution parse error at line " +
                        std::to_string(lineno) + ": unknown variable " + name);
        values[var] = value;
    }

    Solution sol;
    sol.values = std::move(values);
    if (auto bad = model.check_point(sol.values, 1e-6)) {
        sol.status = Solution::Status::Infeasible;
        sol.objective = kInf;
        sol.note = "violates " + *bad;
        return sol;
    }
    sol.status = Solution::Status::Feasible;
    sol.objective = model.objective_value(sol.values);
    sol.best_bound = -kInf;
    return sol;
}

Solution import_solution_file(const std::string& path,
                              const MilpModel& model) {
    return import_solution(read_text_file(path), model);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw error("cannot write " + path);
    out << content;
    if (!out) throw error("write failed for " + path);
}

} // namespace hetmap
