#include "savflow/io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace savflow {

namespace {

static_assert(std::endian::native == std::endian::little,
              "savf1 snapshots assume a little-endian host");

std::string fmt(double d) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", d);
    return buf;
}

void ensure_parent(const std::string& path) {
    std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
}

std::ofstream open_out(const std::string& path) {
    ensure_parent(path);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    return out;
}

void put_u32(std::ostream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), 4);
}

void put_f64(std::ostream& out, double v) {
    out.write(reinterpret_cast<const char*>(&v), 8);
}

std::uint32_t get_u32(std::istream& in, const std::string& path) {
    std::uint32_t v;
    if (!in.read(reinterpret_cast<char*>(&v), 4))
        throw ConfigError("truncated snapshot '" + path + "'");
    return v;
}

double get_f64(std::istream& in, const std::string& path) {
    double v;
    if (!in.read(reinterpret_cast<char*>(&v), 8))
        throw ConfigError("truncated snapshot '" + path + "'");
    return v;
}

void write_snapshot_payload(const std::string& path, const std::string& name,
                            const PeriodicGrid& g, double time,
                            const std::vector<const std::vector<double>*>& comps) {
    std::ofstream out = open_out(path);
    out.write("SAVF1", 5);
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put_u32(out, static_cast<std::uint32_t>(g.dim));
    for (int a = 0; a < g.dim; ++a) put_u32(out, static_cast<std::uint32_t>(g.modes[a]));
    for (int a = 0; a < g.dim; ++a) put_f64(out, g.extent[a]);
    put_f64(out, time);
    put_u32(out, static_cast<std::uint32_t>(comps.size()));
    for (const auto* c : comps)
        out.write(reinterpret_cast<const char*>(c->data()),
                  static_cast<std::streamsize>(c->size() * sizeof(double)));
    if (!out) throw ConfigError("failed writing snapshot '" + path + "'");
}

std::string py_list(const std::vector<std::string>& items) {
    std::string s = "[";
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) s += ", ";
        s += "\"" + items[i] + "\"";
    }
    return s + "]";
}

} // namespace

void write_energy_csv(const std::vector<EnergyRecord>& recs, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "step,t,E_original,E_modified,R,diagnostic_tag,diagnostic_value,"
           "dissipation_residual\n";
    for (const auto& r : recs)
        out << r.step << ',' << fmt(r.t) << ',' << fmt(r.E_original) << ','
            << fmt(r.E_modified) << ',' << fmt(r.R) << ',' << r.diagnostic_tag
            << ',' << fmt(r.diagnostic_value) << ',' << fmt(r.dissipation_residual)
            << '\n';
    if (!out) throw ConfigError("failed writing '" + path + "'");
}

std::vector<EnergyRecord> read_energy_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line))
        throw ConfigError("empty energy csv '" + path + "'");
    std::vector<EnergyRecord> recs;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string item;
        std::vector<std::string> cells;
        while (std::getline(ss, item, ',')) cells.push_back(item);
        if (cells.size() != 8)
            throw ConfigError("bad row in '" + path + "': " + line);
        EnergyRecord r;
        r.step = std::stol(cells[0]);
        r.t = std::stod(cells[1]);
        r.E_original = std::stod(cells[2]);
        r.E_modified = std::stod(cells[3]);
        r.R = std::stod(cells[4]);
        r.diagnostic_tag = cells[5];
        r.diagnostic_value = std::stod(cells[6]);
        r.dissipation_residual = std::stod(cells[7]);
        recs.push_back(std::move(r));
    }
    return recs;
}

void write_snapshot(const std::string& path, const std::string& field_name,
                    const ScalarField& f, double time) {
    write_snapshot_payload(path, field_name, f.grid, time, {&f.data});
}

void write_snapshot(const std::string& path, const std::string& field_name,
                    const VectorField& u, double time) {
    std::vector<const std::vector<double>*> comps;
    for (const auto& c : u.comp) comps.push_back(&c.data);
    write_snapshot_payload(path, field_name, u.grid(), time, comps);
}

Snapshot read_snapshot(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    char magic[5];
    if (!in.read(magic, 5) || std::memcmp(magic, "SAVF1", 5) != 0)
        throw ConfigError("'" + path + "' is not a savf1 snapshot");
    Snapshot s;
    std::uint32_t nlen = get_u32(in, path);
    s.field_name.resize(nlen);
    if (nlen && !in.read(s.field_name.data(), nlen))
        throw ConfigError("truncated snapshot '" + path + "'");
    int dim = static_cast<int>(get_u32(in, path));
    std::array<double, max_dim> extents{};
    std::array<int, max_dim> modes{};
    if (dim < 1 || dim > max_dim)
        throw ConfigError("snapshot '" + path + "': bad dimension");
    for (int a = 0; a < dim; ++a) modes[a] = static_cast<int>(get_u32(in, path));
    for (int a = 0; a < dim; ++a) extents[a] = get_f64(in, path);
    s.grid = build_grid(dim, extents, modes);
    s.time = get_f64(in, path);
    s.components = static_cast<int>(get_u32(in, path));
    if (s.components < 1 || s.components > max_dim)
        throw ConfigError("snapshot '" + path + "': bad component count");
    s.payload.resize(s.grid.size() * static_cast<std::size_t>(s.components));
    if (!in.read(reinterpret_cast<char*>(s.payload.data()),
                 static_cast<std::streamsize>(s.payload.size() * sizeof(double))))
        throw ConfigError("truncated snapshot '" + path + "'");
    return s;
}

void write_comparison_csv(const ComparisonTable& tab, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "t";
    for (const auto& l : tab.labels) out << ',' << l;
    out << '\n';
    for (std::size_t i = 0; i < tab.time.size(); ++i) {
        out << fmt(tab.time[i]);
        for (const auto& col : tab.columns) out << ',' << fmt(col[i]);
        out << '\n';
    }
    if (!out) throw ConfigError("failed writing '" + path + "'");
}

void write_convergence_csv(const std::vector<double>& dt,
                           const std::vector<double>& error,
                           const std::vector<double>& pairwise_order,
                           const std::string& path) {
    if (dt.size() != error.size() || pairwise_order.size() + 1 != dt.size())
        throw ConfigError("convergence csv: inconsistent column lengths");
    std::ofstream out = open_out(path);
    out << "dt,error,pairwise_order\n";
    for (std::size_t i = 0; i < dt.size(); ++i) {
        out << fmt(dt[i]) << ',' << fmt(error[i]) << ',';
        out << (i == 0 ? std::string("nan") : fmt(pairwise_order[i - 1]));
        out << '\n';
    }
    if (!out) throw ConfigError("failed writing '" + path + "'");
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out = open_out(path);
    out << content;
    if (!out) throw ConfigError("failed writing '" + path + "'");
}

void emit_energy_plot(const std::string& script_path,
                      const std::vector<std::string>& csv_paths,
                      const std::string& image_path) {
    std::ostringstream s;
    s << "#!/usr/bin/env python3\n"
      << "import csv\n"
      << "import matplotlib\n"
      << "matplotlib.use(\"Agg\")\n"
      << "import matplotlib.pyplot as plt\n\n"
      << "INPUTS = " << py_list(csv_paths) << "\n"
      << "OUT = \"" << image_path << "\"\n\n"
      << "fig, ax = plt.subplots(figsize=(7.0, 4.5))\n"
      << "ax2 = ax.twinx()\n"
      << "for path in INPUTS:\n"
      << "    ts, eo, em = [], [], []\n"
      << "    with open(path) as fh:\n"
      << "        for row in csv.DictReader(fh):\n"
      << "            ts.append(float(row[\"t\"]))\n"
      << "            eo.append(float(row[\"E_original\"]))\n"
      << "            em.append(float(row[\"E_modified\"]))\n"
      << "    label = path.rsplit(\"/\", 1)[-1].rsplit(\".\", 1)[0]\n"
      << "    ax.plot(ts, eo, label=label + \" E_original\")\n"
      << "    ax2.plot(ts, em, \"--\", label=label + \" E_modified\")\n"
      << "ax.set_xlabel(\"t\")\n"
      << "ax.set_ylabel(\"E_original\")\n"
      << "ax2.set_ylabel(\"E_modified\")\n"
      << "h1, l1 = ax.get_legend_handles_labels()\n"
      << "h2, l2 = ax2.get_legend_handles_labels()\n"
      << "ax.legend(h1 + h2, l1 + l2, fontsize=8)\n"
      << "fig.tight_layout()\n"
      << "fig.savefig(OUT, dpi=150)\n";
    write_text_file(script_path, s.str());
}

void emit_convergence_plot(const std::string& script_path,
                           const std::vector<std::string>& csv_paths) {
    std::ostringstream s;
    s << "#!/usr/bin/env python3\n"
      << "import csv\n"
      << "import matplotlib\n"
      << "matplotlib.use(\"Agg\")\n"
      << "import matplotlib.pyplot as plt\n\n"
      << "INPUTS = " << py_list(csv_paths) << "\n\n"
      << "for path in INPUTS:\n"
      << "    dts, errs = [], []\n"
      << "    with open(path) as fh:\n"
      << "        for row in csv.DictReader(fh):\n"
      << "            dts.append(float(row[\"dt\"]))\n"
      << "            errs.append(float(row[\"error\"]))\n"
      << "    fig, ax = plt.subplots(figsize=(5.5, 4.5))\n"
      << "    ax.loglog(dts, errs, \"o-\", label=\"error\")\n"
      << "    for p in (1, 2, 3, 4):\n"
      << "        ref = [errs[0] * (dt / dts[0]) ** p for dt in dts]\n"
      << "        ax.loglog(dts, ref, \":\", label=\"slope %d\" % p)\n"
      << "    ax.set_xlabel(\"dt\")\n"
      << "    ax.set_ylabel(\"L2 error\")\n"
      << "    ax.legend(fontsize=8)\n"
      << "    fig.tight_layout()\n"
      << "    fig.savefig(path.rsplit(\".\", 1)[0] + \".png\", dpi=150)\n"
      << "    plt.close(fig)\n";
    write_text_file(script_path, s.str());
}

void emit_field_plot(const std::string& script_path,
                     const std::vector<std::string>& snapshot_paths) {
    std::ostringstream s;
    s << "#!/usr/bin/env python3\n"
      << "import struct\n"
      << "import numpy as np\n"
      << "import matplotlib\n"
      << "matplotlib.use(\"Agg\")\n"
      << "import matplotlib.pyplot as plt\n\n"
      << "INPUTS = " << py_list(snapshot_paths) << "\n\n"
      << "def read_savf1(path):\n"
      << "    with open(path, \"rb\") as fh:\n"
      << "        data = fh.read()\n"
      << "    assert data[:5] == b\"SAVF1\", path\n"
      << "    off = 5\n"
      << "    (nlen,) = struct.unpack_from(\"<I\", data, off); off += 4\n"
      << "    name = data[off:off + nlen].decode(); off += nlen\n"
      << "    (dim,) = struct.unpack_from(\"<I\", data, off); off += 4\n"
      << "    modes = struct.unpack_from(\"<%dI\" % dim, data, off); off += 4 * dim\n"
      << "    extents = struct.unpack_from(\"<%dd\" % dim, data, off); off += 8 * dim\n"
      << "    (time,) = struct.unpack_from(\"<d\", data, off); off += 8\n"
      << "    (ncomp,) = struct.unpack_from(\"<I\", data, off); off += 4\n"
      << "    n = int(np.prod(modes))\n"
      << "    payload = np.frombuffer(data, dtype=\"<f8\", count=n * ncomp, offset=off)\n"
      << "    return name, modes, extents, time, payload.reshape((ncomp,) + tuple(modes))\n\n"
      << "for path in INPUTS:\n"
      << "    name, modes, extents, time, comp = read_savf1(path)\n"
      << "    field = comp[0] if comp.shape[0] == 1 else np.sqrt((comp ** 2).sum(axis=0))\n"
      << "    if field.ndim == 3:\n"
      << "        field = field[:, :, field.shape[2] // 2]\n"
      << "    fig, ax = plt.subplots(figsize=(5.5, 4.8))\n"
      << "    if field.ndim == 1:\n"
      << "        x = np.linspace(0.0, extents[0], modes[0], endpoint=False)\n"
      << "        ax.plot(x, field)\n"
      << "    else:\n"
      << "        x = np.linspace(0.0, extents[0], field.shape[0], endpoint=False)\n"
      << "        y = np.linspace(0.0, extents[1], field.shape[1], endpoint=False)\n"
      << "        xx, yy = np.meshgrid(x, y, indexing=\"ij\")\n"
      << "        im = ax.contourf(xx, yy, field, levels=40)\n"
      << "        fig.colorbar(im, ax=ax)\n"
      << "        ax.set_aspect(\"equal\")\n"
      << "    ax.set_title(\"%s  t=%g\" % (name, time))\n"
      << "    fig.tight_layout()\n"
      << "    fig.savefig(path.rsplit(\".\", 1)[0] + \".png\", dpi=150)\n"
      << "    plt.close(fig)\n";
    write_text_file(script_path, s.str());
}

} // namespace savflow
