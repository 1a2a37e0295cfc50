#include "pathomics/cohort.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace pathomics {

namespace fs = std::filesystem;

namespace {

constexpr char kPfmMagic[4] = {'P', 'F', 'M', '1'};

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double parse_double(const std::string& s, const fs::path& file, std::size_t line) {
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0' || !std::isfinite(v)) {
        throw std::runtime_error("parse error in " + file.string() + " line " +
                                 std::to_string(line) + ": bad number '" + s + "'");
    }
    return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::vector<std::string> read_lines(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open " + file.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) lines.push_back(line);
    }
    return lines;
}

void put_u32_le(std::ofstream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32_le(const unsigned char* b) {
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

Tensor read_pfm(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + file.string());
    unsigned char header[16];
    if (!in.read(reinterpret_cast<char*>(header), 16)) {
        throw std::runtime_error("parse error in " + file.string() +
                                 " at byte 0: truncated header");
    }
    if (std::memcmp(header, kPfmMagic, 4) != 0) {
        throw std::runtime_error("parse error in " + file.string() + " at byte 0: bad magic");
    }
    std::uint32_t k = get_u32_le(header + 4);
    std::uint32_t di = get_u32_le(header + 8);
    if (di != kPatchDim) {
        throw std::runtime_error("parse error in " + file.string() + " at byte 8: d_i " +
                                 std::to_string(di) + " != " + std::to_string(kPatchDim));
    }
    if (get_u32_le(header + 12) != 0) {
        throw std::runtime_error("parse error in " + file.string() +
                                 " at byte 12: reserved bytes not zero");
    }
    if (k == 0) {
        throw std::runtime_error("parse error in " + file.string() + " at byte 4: K is zero");
    }
    std::size_t count = static_cast<std::size_t>(k) * kPatchDim;
    std::vector<float> payload(count);
    if (!in.read(reinterpret_cast<char*>(payload.data()),
                 static_cast<std::streamsize>(count * sizeof(float)))) {
        std::size_t got = static_cast<std::size_t>(in.gcount());
        throw std::runtime_error("parse error in " + file.string() + " at byte " +
                                 std::to_string(16 + got) + ": payload shorter than header K=" +
                                 std::to_string(k));
    }
    char extra;
    if (in.read(&extra, 1)) {
        throw std::runtime_error("parse error in " + file.string() + " at byte " +
                                 std::to_string(16 + count * sizeof(float)) +
                                 ": payload longer than header K=" + std::to_string(k));
    }
    Tensor t = Tensor::zeros({k, kPatchDim});
    for (std::size_t i = 0; i < count; ++i) {
        t.data[i] = static_cast<double>(payload[i]);
        if (!std::isfinite(t.data[i])) {
            throw std::runtime_error("parse error in " + file.string() + " at byte " +
                                     std::to_string(16 + i * sizeof(float)) +
                                     ": non-finite feature value");
        }
    }
    return t;
}

void write_pfm(const fs::path& file, const Tensor& patches) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    out.write(kPfmMagic, 4);
    put_u32_le(out, static_cast<std::uint32_t>(patches.rows()));
    put_u32_le(out, static_cast<std::uint32_t>(patches.cols()));
    put_u32_le(out, 0);
    std::vector<float> payload(patches.data.size());
    for (std::size_t i = 0; i < payload.size(); ++i) {
        payload[i] = static_cast<float>(patches.data[i]);
    }
    out.write(reinterpret_cast<const char*>(payload.data()),
              static_cast<std::streamsize>(payload.size() * sizeof(float)));
    if (!out) throw std::runtime_error("write failed for " + file.string());
}

}  // namespace

const PatientRecord& Cohort::patient(const std::string& id) const {
    for (const PatientRecord& p : patients) {
        if (p.id == id) return p;
    }
    throw std::invalid_argument("cohort: unknown patient id '" + id + "'");
}

std::vector<SurvivalRecord> Cohort::survival_of(std::span<const std::string> ids) const {
    std::vector<SurvivalRecord> out;
    out.reserve(ids.size());
    for (const std::string& id : ids) out.push_back(patient(id).survival);
    return out;
}

Cohort load_cohort(const fs::path& manifest_path, const fs::path& features_dir,
                   const fs::path& genomics_dir, const fs::path& group_spec_path,
                   LoadStats* stats) {
    Cohort cohort;

    std::vector<std::string> spec_lines = read_lines(group_spec_path);
    if (spec_lines.empty() || spec_lines[0] != "group_name,dim") {
        throw std::runtime_error("parse error in " + group_spec_path.string() +
                                 " line 1: expected header 'group_name,dim'");
    }
    std::set<std::string> group_names;
    for (std::size_t i = 1; i < spec_lines.size(); ++i) {
        std::vector<std::string> cells = split(spec_lines[i], ',');
        if (cells.size() != 2) {
            throw std::runtime_error("parse error in " + group_spec_path.string() + " line " +
                                     std::to_string(i + 1) + ": expected 2 fields");
        }
        std::size_t dim = static_cast<std::size_t>(parse_double(cells[1], group_spec_path, i + 1));
        if (dim == 0) {
            throw std::runtime_error("parse error in " + group_spec_path.string() + " line " +
                                     std::to_string(i + 1) + ": group dim must be >= 1");
        }
        if (!group_names.insert(cells[0]).second) {
            throw std::runtime_error("integrity error in " + group_spec_path.string() +
                                     ": duplicate group '" + cells[0] + "'");
        }
        cohort.groups.push_back(GroupSpec{cells[0], dim});
    }
    if (cohort.groups.empty()) {
        throw std::runtime_error("parse error in " + group_spec_path.string() + ": no groups");
    }

    std::vector<std::string> manifest = read_lines(manifest_path);
    if (manifest.empty() || manifest[0] != "patient_id,os_months,event") {
        throw std::runtime_error("parse error in " + manifest_path.string() +
                                 " line 1: expected header 'patient_id,os_months,event'");
    }
    std::set<std::string> seen_ids;
    LoadStats local;
    for (std::size_t i = 1; i < manifest.size(); ++i) {
        std::vector<std::string> cells = split(manifest[i], ',');
        if (cells.size() != 3) {
            throw std::runtime_error("parse error in " + manifest_path.string() + " line " +
                                     std::to_string(i + 1) + ": expected 3 fields");
        }
        const std::string& id = cells[0];
        if (id.empty()) {
            throw std::runtime_error("parse error in " + manifest_path.string() + " line " +
                                     std::to_string(i + 1) + ": empty patient id");
        }
        if (!seen_ids.insert(id).second) {
            throw std::runtime_error("integrity error in " + manifest_path.string() +
                                     ": duplicate patient id '" + id + "'");
        }
        if (cells[1].empty() || cells[2].empty()) {
            ++local.dropped;  // missing survival ground truth
            continue;
        }
        double os = parse_double(cells[1], manifest_path, i + 1);
        double ev = parse_double(cells[2], manifest_path, i + 1);
        if (os <= 0.0) {
            throw std::runtime_error("parse error in " + manifest_path.string() + " line " +
                                     std::to_string(i + 1) + ": os_months must be positive");
        }
        if (ev != 0.0 && ev != 1.0) {
            throw std::runtime_error("parse error in " + manifest_path.string() + " line " +
                                     std::to_string(i + 1) + ": event must be 0 or 1");
        }

        fs::path pfm = features_dir / (id + ".pfm");
        fs::path gen = genomics_dir / (id + ".csv");
        if (!fs::exists(pfm) || !fs::exists(gen)) {
            ++local.dropped;
            continue;
        }

        PatientRecord record;
        record.id = id;
        record.survival = SurvivalRecord{id, os, static_cast<int>(ev)};
        record.patches = read_pfm(pfm);
        if (record.patches.rows() < cohort.groups.size()) {
            throw std::runtime_error("integrity error in " + pfm.string() + ": only " +
                                     std::to_string(record.patches.rows()) +
                                     " patches for " + std::to_string(cohort.groups.size()) +
                                     " groups");
        }

        std::map<std::string, Tensor> vectors;
        std::vector<std::string> glines = read_lines(gen);
        for (std::size_t li = 0; li < glines.size(); ++li) {
            std::vector<std::string> cells2 = split(glines[li], ',');
            if (cells2.size() != 2) {
                throw std::runtime_error("parse error in " + gen.string() + " line " +
                                         std::to_string(li + 1) + ": expected 2 fields");
            }
            std::vector<std::string> nums = split(cells2[1], ';');
            Tensor vec = Tensor::zeros({nums.size()});
            for (std::size_t vi = 0; vi < nums.size(); ++vi) {
                vec.data[vi] = parse_double(nums[vi], gen, li + 1);
            }
            vectors.emplace(cells2[0], std::move(vec));
        }
        bool complete = true;
        for (const GroupSpec& gs : cohort.groups) {
            auto it = vectors.find(gs.name);
            if (it == vectors.end()) {
                complete = false;  // missing genomics group: drop the patient
                break;
            }
            if (it->second.data.size() != gs.dim) {
                throw std::runtime_error("parse error in " + gen.string() + ": group '" +
                                         gs.name + "' has " +
                                         std::to_string(it->second.data.size()) +
                                         " values, spec says " + std::to_string(gs.dim));
            }
            record.genomics.push_back(it->second);
        }
        if (!complete) {
            ++local.dropped;
            continue;
        }
        cohort.patients.push_back(std::move(record));
    }
    if (local.dropped > 0) {
        std::cerr << "load_cohort: dropped " << local.dropped
                  << " patient(s) missing a modality or survival ground truth\n";
    }
    if (stats) *stats = local;
    return cohort;
}

Cohort load_cohort_dir(const fs::path& dir, LoadStats* stats) {
    return load_cohort(dir / "manifest.csv", dir / "features", dir / "genomics",
                       dir / "groups.csv", stats);
}

void write_cohort(const Cohort& cohort, const fs::path& dir) {
    fs::create_directories(dir / "features");
    fs::create_directories(dir / "genomics");

    std::ofstream groups(dir / "groups.csv");
    if (!groups) throw std::runtime_error("cannot write " + (dir / "groups.csv").string());
    groups << "group_name,dim\n";
    for (const GroupSpec& g : cohort.groups) groups << g.name << "," << g.dim << "\n";

    std::ofstream manifest(dir / "manifest.csv");
    if (!manifest) throw std::runtime_error("cannot write " + (dir / "manifest.csv").string());
    manifest << "patient_id,os_months,event\n";
    for (const PatientRecord& p : cohort.patients) {
        manifest << p.id << "," << fmt_double(p.survival.os_months) << "," << p.survival.event
                 << "\n";
        write_pfm(dir / "features" / (p.id + ".pfm"), p.patches);
        std::ofstream gen(dir / "genomics" / (p.id + ".csv"));
        if (!gen) throw std::runtime_error("cannot write genomics for " + p.id);
        for (std::size_t n = 0; n < cohort.groups.size(); ++n) {
            gen << cohort.groups[n].name << ",";
            const Tensor& vec = p.genomics[n];
            for (std::size_t i = 0; i < vec.data.size(); ++i) {
                if (i) gen << ";";
                gen << fmt_double(vec.data[i]);
            }
            gen << "\n";
        }
    }
}

}  // namespace pathomics
