#include "ssc/io.hpp"

#include "ssc/errors.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace ssc {

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

void coord_header(std::ostringstream& out, int n) {
    for (int k = 0; k < n; ++k) out << 'x' << (k + 1) << ',';
}

void coords(std::ostringstream& out, const Grid& g, std::size_t node) {
    for (int k = 0; k < g.dim(); ++k) out << format_number(g.coordinate(node, k)) << ',';
}

struct Table {
    int dim = 0;
    std::vector<std::vector<double>> x;
    std::vector<int> regime;
    std::vector<std::string> last;
};

Table read_table(const std::filesystem::path& path, const std::string& last_column) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::kConfig, "cannot open '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::kConfig, "'" + path.string() + "' is empty");
    std::vector<std::string> head;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) head.push_back(cell);
    }
    if (head.size() < 3 || head[head.size() - 2] != "regime" || head.back() != last_column)
        throw Error(ErrorCode::kConfig, "'" + path.string() + "' has an unexpected header");
    Table t;
    t.dim = static_cast<int>(head.size()) - 2;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != head.size())
            throw Error(ErrorCode::kConfig, path.string() + ":" + std::to_string(row) + ": wrong column count");
        try {
            std::vector<double> x(static_cast<std::size_t>(t.dim));
            for (int k = 0; k < t.dim; ++k) x[static_cast<std::size_t>(k)] = std::stod(cells[static_cast<std::size_t>(k)]);
            t.x.push_back(std::move(x));
            t.regime.push_back(std::stoi(cells[static_cast<std::size_t>(t.dim)]) - 1);
        } catch (const std::logic_error&) {
            throw Error(ErrorCode::kConfig, path.string() + ":" + std::to_string(row) + ": not a number");
        }
        t.last.push_back(cells.back());
    }
    return t;
}

Grid grid_of(const Table& t, int& regimes, const std::string& origin) {
    std::vector<std::set<double>> axes(static_cast<std::size_t>(t.dim));
    regimes = 0;
    for (std::size_t i = 0; i < t.x.size(); ++i) {
        for (int k = 0; k < t.dim; ++k) axes[static_cast<std::size_t>(k)].insert(t.x[i][static_cast<std::size_t>(k)]);
        regimes = std::max(regimes, t.regime[i] + 1);
    }
    std::vector<double> upper;
    std::vector<int> nodes;
    for (const auto& a : axes) {
        if (a.size() < 3) throw Error(ErrorCode::kConfig, "'" + origin + "' needs >= 3 nodes per axis");
        upper.push_back(*a.rbegin());
        nodes.push_back(static_cast<int>(a.size()));
    }
    Grid g(upper, nodes);
    if (t.x.size() != g.size() * static_cast<std::size_t>(regimes))
        throw Error(ErrorCode::kConfig, "'" + origin + "' does not cover a full grid");
    return g;
}

std::size_t node_of(const Grid& g, const std::vector<double>& x) {
    std::size_t node = 0;
    for (int k = 0; k < g.dim(); ++k) {
        const auto i = static_cast<std::size_t>(std::llround(x[static_cast<std::size_t>(k)] / g.step(k)));
        node += i * g.stride(k);
    }
    return node;
}

}  // namespace

std::string value_csv(const ValueField& field) {
    std::ostringstream out;
    const Grid& g = field.grid();
    coord_header(out, g.dim());
    out << "regime,value\n";
    for (std::size_t node = 0; node < g.size(); ++node) {
        for (int a = 0; a < field.regimes(); ++a) {
            coords(out, g, node);
            out << (a + 1) << ',' << format_number(field(node, a)) << '\n';
        }
    }
    return out.str();
}

std::string policy_csv(const PolicyField& policy) {
    std::ostringstream out;
    const Grid& g = policy.grid();
    coord_header(out, g.dim());
    out << "regime,action\n";
    for (std::size_t node = 0; node < g.size(); ++node) {
        for (int a = 0; a < policy.regimes(); ++a) {
            coords(out, g, node);
            out << (a + 1) << ',' << action_label(policy(node, a)) << '\n';
        }
    }
    return out.str();
}

std::string boundary_csv(const Region& region, const Grid& grid) {
    std::ostringstream out;
    out << "regime,node,";
    for (int k = 0; k < grid.dim(); ++k) out << 'x' << (k + 1) << (k + 1 < grid.dim() ? "," : "\n");
    for (std::size_t a = 0; a < region.boundary.size(); ++a) {
        for (std::size_t node : region.boundary[a]) {
            out << (a + 1) << ',' << node;
            for (int k = 0; k < grid.dim(); ++k) out << ',' << format_number(grid.coordinate(node, k));
            out << '\n';
        }
    }
    return out.str();
}

ValueField read_value_csv(const std::filesystem::path& path) {
    const Table t = read_table(path, "value");
    int m = 0;
    const Grid g = grid_of(t, m, path.string());
    ValueField field(g, m);
    for (std::size_t i = 0; i < t.x.size(); ++i) {
        try {
            field(node_of(g, t.x[i]), t.regime[i]) = std::stod(t.last[i]);
        } catch (const std::logic_error&) {
            throw Error(ErrorCode::kConfig, path.string() + ": bad value '" + t.last[i] + "'");
        }
    }
    return field;
}

PolicyField read_policy_csv(const std::filesystem::path& path) {
    const Table t = read_table(path, "action");
    int m = 0;
    const Grid g = grid_of(t, m, path.string());
    PolicyField policy(g, m);
    for (std::size_t i = 0; i < t.x.size(); ++i) {
        const std::string& label = t.last[i];
        int action = -1;
        if (label == "CONTINUE") {
            action = PolicyField::kContinue;
        } else if (label.rfind("PUSH_", 0) == 0) {
            try {
                action = std::stoi(label.substr(5));
            } catch (const std::logic_error&) {
            }
            if (action < 1 || action > g.dim()) action = -1;
        }
        if (action < 0) throw Error(ErrorCode::kConfig, path.string() + ": unknown action '" + label + "'");
        policy(node_of(g, t.x[i]), t.regime[i]) = action;
    }
    return policy;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::kConfig, "cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw Error(ErrorCode::kConfig, "write failed for '" + path.string() + "'");
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::kConfig, "cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace ssc
