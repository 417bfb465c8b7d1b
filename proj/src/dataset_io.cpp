#include "turbotwin/dataset_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace twin {

std::string format_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& text, const std::string& where) {
    double value = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    auto res = std::from_chars(begin, end, value);
    if (res.ec != std::errc{} || res.ptr != end)
        throw DataError(where + ": non-numeric value '" + text + "'");
    if (!std::isfinite(value))
        throw DataError(where + ": non-finite value '" + text + "'");
    return value;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

struct Cursor {
    std::string path;
    int line_no = 0;
    std::string at(int column = 0) const {
        std::string loc = path + ":" + std::to_string(line_no);
        if (column > 0) loc += ":col" + std::to_string(column);
        return loc;
    }
};

void parse_meta_line(const std::string& line, RawRun& run, const Cursor& cur) {
    const auto colon = line.find(':');
    if (colon == std::string::npos)
        throw DataError(cur.at() + ": malformed metadata line (expected '# key: value')");
    const std::string key = trim(line.substr(1, colon - 1));
    const std::string value = trim(line.substr(colon + 1));
    if (key.empty()) throw DataError(cur.at() + ": empty metadata key");
    if (key == "run_id")
        run.run_id = value;
    else
        run.meta[key] = value;
}

void load_sectioned(std::ifstream& in, RawRun& run, std::string raw, Cursor& cur) {
    Channel* current = nullptr;
    do {
        const std::string line = trim(raw);
        if (line.empty()) continue;
        if (line.rfind("##", 0) == 0) {
            const auto fields = split_csv(trim(line.substr(2)));
            if (fields.size() != 4 || trim(fields[0]) != "channel")
                throw DataError(cur.at()
                                + ": malformed channel header (expected "
                                  "'## channel,<name>,<unit>,<rate>')");
            Channel ch;
            ch.name = trim(fields[1]);
            ch.unit = trim(fields[2]);
            ch.rate = parse_double(trim(fields[3]), cur.at(4));
            if (!(ch.rate > 0.0)) throw DataError(cur.at(4) + ": channel rate must be > 0");
            run.channels.push_back(std::move(ch));
            current = &run.channels.back();
        } else if (line.rfind('#', 0) == 0) {
            parse_meta_line(line, run, cur);
        } else {
            if (current == nullptr)
                throw DataError(cur.at() + ": data before any channel header");
            current->samples.push_back(parse_double(line, cur.at(1)));
        }
    } while (++cur.line_no, std::getline(in, raw));

    if (run.channels.empty()) throw DataError(cur.path + ": no channel sections");
    for (const Channel& ch : run.channels)
        if (ch.samples.empty())
            throw DataError(cur.path + ": channel '" + ch.name + "' has an empty data section");
}

void load_wide(std::ifstream& in, RawRun& run, std::string header, Cursor& cur) {
    const auto names = split_csv(header);
    if (names.size() < 2 || trim(names[0]) != "time")
        throw DataError(cur.at() + ": wide header must be 'time,<channel>,...'");

    std::vector<Channel> channels(names.size() - 1);
    for (std::size_t i = 1; i < names.size(); ++i) {
        channels[i - 1].name = trim(names[i]);
        if (channels[i - 1].name.empty())
            throw DataError(cur.at(static_cast<int>(i + 1)) + ": empty channel name");
    }

    std::vector<double> times;
    std::string line;
    while (++cur.line_no, std::getline(in, line)) {
        line = trim(line);
        if (line.empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() != names.size())
            throw DataError(cur.at() + ": expected " + std::to_string(names.size())
                            + " columns, got " + std::to_string(fields.size()));
        times.push_back(parse_double(trim(fields[0]), cur.at(1)));
        for (std::size_t i = 1; i < fields.size(); ++i)
            channels[i - 1].samples.push_back(
                parse_double(trim(fields[i]), cur.at(static_cast<int>(i + 1))));
    }
    if (times.size() < 2)
        throw DataError(cur.path + ": wide run needs at least 2 rows to establish a rate");

    const double dt = times[1] - times[0];
    if (!(dt > 0.0)) throw DataError(cur.path + ": time column must be strictly increasing");
    for (std::size_t i = 1; i + 1 < times.size(); ++i)
        if (std::abs(times[i + 1] - times[i] - dt) > 1e-6 * dt)
            throw DataError(cur.path + ": time column is not uniformly spaced near row "
                            + std::to_string(i + 2));

    // An explicit `# rate:` entry wins over the inferred spacing (and makes
    // save/load round trips bit-exact); it must agree with the time column.
    double rate = 1.0 / dt;
    if (auto it = run.meta.find("rate"); it != run.meta.end()) {
        const double declared = parse_double(it->second, cur.path + ": rate");
        if (!(declared > 0.0) || std::abs(declared - rate) > 1e-6 * rate)
            throw DataError(cur.path + ": declared rate " + it->second
                            + " disagrees with the time column spacing");
        rate = declared;
        run.meta.erase(it);
    }

    for (Channel& ch : channels) {
        ch.rate = rate;
        ch.start_time = times[0];
        auto unit = run.meta.find("unit." + ch.name);
        if (unit != run.meta.end()) {
            ch.unit = unit->second;
            run.meta.erase(unit);
        }
    }
    run.channels = std::move(channels);
}

} // namespace

RawRun load_run(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open run file '" + path + "'");

    RawRun run;
    Cursor cur{path, 0};
    std::string line;

    // Leading metadata block, then dispatch on the first structural line.
    while (++cur.line_no, std::getline(in, line)) {
        line = trim(line);
        if (line.empty()) continue;
        if (line.rfind("##", 0) == 0) {
            load_sectioned(in, run, line, cur);
            return run;
        }
        if (line.rfind('#', 0) == 0) {
            parse_meta_line(line, run, cur);
            continue;
        }
        load_wide(in, run, line, cur);
        return run;
    }
    throw DataError(path + ": no data section");
}

void save_run(const RunDataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary); // \n regardless of platform
    if (!out) throw DataError("cannot write run file '" + path + "'");

    if (!ds.run_id.empty()) out << "# run_id: " << ds.run_id << "\n";
    out << "# rate: " << format_double(ds.rate) << "\n";
    for (const auto& [key, value] : ds.meta) out << "# " << key << ": " << value << "\n";
    for (const auto& [name, unit] : ds.units) out << "# unit." << name << ": " << unit << "\n";

    out << "time";
    for (const std::string& name : ds.channel_names) out << "," << name;
    out << "\n";
    for (Index i = 0; i < ds.length(); ++i) {
        out << format_double(ds.time_at(i));
        for (Index c = 0; c < ds.n_channels(); ++c) out << "," << format_double(ds.data(c, i));
        out << "\n";
    }
    if (!out) throw DataError("failed writing run file '" + path + "'");
}

} // namespace twin
