#ifndef NETREC_IO_HPP
#define NETREC_IO_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "netrec/sample_matrix.hpp"
#include "netrec/sparse_weights.hpp"

namespace netrec {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// Writes `text` to `path` via a temp file + rename, so a failing run never
/// leaves a partial file behind.
inline void atomic_write(const std::string& path, const std::string& text) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open for writing: " + tmp);
        out << text;
        if (!out.flush()) throw std::runtime_error("write failed: " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

// Edge-list format: `# N=<n>` header, one `# theta\ti\tvalue` line per node,
// then one `i\tj\tw` line per stored edge (0-based ids, 17 significant digits).
inline std::string weights_to_text(const SparseWeights& w) {
    std::ostringstream out;
    out << "# N=" << w.num_nodes() << "\n";
    for (NodeId i = 0; i < w.num_nodes(); ++i)
        out << "# theta\t" << i << "\t" << format_double(w.theta(i)) << "\n";
    for (const auto& e : w.sorted_edges())
        out << e.i << "\t" << e.j << "\t" << format_double(e.dist) << "\n";
    return out.str();
}

inline void write_weights(const SparseWeights& w, const std::string& path) {
    atomic_write(path, weights_to_text(w));
}

inline SparseWeights read_weights(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("# N=", 0) != 0)
        throw std::runtime_error("weights file: missing '# N=' header in " + path);
    const NodeId n = static_cast<NodeId>(std::stol(line.substr(4)));
    SparseWeights w(n, 0);
    SampleMatrix empty(n, 0);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream ls(line.substr(1));
            std::string tag;
            ls >> tag;
            if (tag == "theta") {
                NodeId i;
                double v;
                if (!(ls >> i >> v)) throw std::runtime_error("weights file: bad theta line");
                w.set_theta(i, v);
            }
            continue;
        }
        std::istringstream ls(line);
        NodeId i, j;
        double v;
        if (!(ls >> i >> j >> v)) throw std::runtime_error("weights file: bad edge line: " + line);
        w.set_edge(i, j, v, empty);
    }
    return w;
}

// Sample-matrix format: first line `N M`, then N rows of M values
// (row = node, column = sample).
inline std::string samples_to_text(const SampleMatrix& x) {
    std::ostringstream out;
    out << x.num_nodes() << " " << x.num_samples() << "\n";
    for (NodeId i = 0; i < x.num_nodes(); ++i) {
        for (int m = 0; m < x.num_samples(); ++m) {
            if (m) out << " ";
            out << format_double(x(i, m));
        }
        out << "\n";
    }
    return out.str();
}

inline void write_samples(const SampleMatrix& x, const std::string& path) {
    atomic_write(path, samples_to_text(x));
}

inline SampleMatrix read_samples(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    NodeId n;
    int m;
    if (!(in >> n >> m)) throw std::runtime_error("samples file: missing 'N M' header");
    SampleMatrix x(n, m);
    for (NodeId i = 0; i < n; ++i)
        for (int s = 0; s < m; ++s) {
            double v;
            if (!(in >> v)) throw std::runtime_error("samples file: truncated data");
            x.set(i, s, v);
        }
    return x;
}

}  // namespace netrec

#endif
