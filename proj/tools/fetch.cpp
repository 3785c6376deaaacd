#include "fetch.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

#include <httplib.h>

namespace {

struct Source {
    const char* name;
    const char* host;
    const char* path;
    const char* file;
};

// Snapshots referenced by the study; the WHO dashboard file is the Wayback
// Machine capture so reruns see the exact same bytes.
const Source kSources[] = {
    {"who", "https://web.archive.org",
     "/web/20231111122217/https://covid19.who.int/WHO-COVID-19-global-data.csv", "who.csv"},
    {"oxcgrt", "https://raw.githubusercontent.com",
     "/OxCGRT/covid-policy-dataset/main/data/OxCGRT_compact_national_v1.csv", "oxcgrt.csv"},
};

bool fetch_one(const Source& src, const std::string& data_dir) {
    std::cerr << "fetching " << src.name << " from " << src.host << src.path << "\n";
    httplib::Client client(src.host);
    client.set_follow_location(true);
    client.set_connection_timeout(30);
    client.set_read_timeout(120);
    auto res = client.Get(src.path);
    if (!res) {
        std::cerr << "error: " << src.name << ": " << httplib::to_string(res.error()) << "\n";
        return false;
    }
    if (res->status != 200) {
        std::cerr << "error: " << src.name << ": HTTP " << res->status << "\n";
        return false;
    }
    auto path = std::filesystem::path(data_dir) / src.file;
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        std::cerr << "error: cannot write " << path.string() << "\n";
        return false;
    }
    out << res->body;
    std::cerr << "wrote " << path.string() << " (" << res->body.size() << " bytes)\n";
    return true;
}

}  // namespace

int run_fetch(const std::string& data_dir, const std::string& what) {
    std::filesystem::create_directories(data_dir);
    bool ok = true;
    bool matched = false;
    for (const auto& src : kSources) {
        if (what != "all" && what != src.name) continue;
        matched = true;
        ok = fetch_one(src, data_dir) && ok;
    }
    if (!matched) {
        std::cerr << "error: nothing to fetch for '" << what << "' (use who, oxcgrt, or all)\n";
        return 1;
    }
    std::cerr << "note: EARS document counts live in the WHO-EARS repository\n"
                 "      (https://github.com/citibeats-labs/who-ears) and Google Trends\n"
                 "      exports must be saved per country as trends/<CODE>.csv; both are\n"
                 "      manual downloads.\n";
    return ok ? 0 : 1;
}
