#include "batchq/spec_file.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "batchq/error.hpp"

namespace batchq {

namespace {

struct Entry {
    std::string value;
    int line;
};

using Section = std::map<std::string, Entry>;

struct Document {
    std::string origin;
    std::map<std::string, Section> sections;
    std::map<std::string, int> section_line;
};

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void fail(const Document& doc, int line, const std::string& msg) {
    std::ostringstream os;
    os << doc.origin << ':' << line << ": " << msg;
    throw Error(ErrorCode::Parse, os.str());
}

Document tokenize(std::string_view text, std::string_view origin) {
    static const std::set<std::string> known = {"arrival", "batch",  "service",
                                                "capacity", "output", "simulation"};
    Document doc{std::string(origin), {}, {}};
    std::string current;
    int line_no = 0;
    std::istringstream in{std::string(text)};
    std::string raw;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        const std::string line = trim(std::string_view(raw).substr(0, hash));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail(doc, line_no, "unterminated section header '" + line + "'");
            current = trim(std::string_view(line).substr(1, line.size() - 2));
            if (!known.count(current)) fail(doc, line_no, "unknown section [" + current + "]");
            if (doc.section_line.count(current)) fail(doc, line_no, "section [" + current + "] repeated");
            doc.section_line[current] = line_no;
            doc.sections[current];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail(doc, line_no, "expected 'key = value', got '" + line + "'");
        if (current.empty()) fail(doc, line_no, "key outside of any section");
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        auto& sec = doc.sections[current];
        if (sec.count(key)) fail(doc, line_no, "[" + current + "] " + key + " given twice");
        sec[key] = {value, line_no};
    }
    return doc;
}

class SectionReader {
public:
    SectionReader(const Document& doc, const std::string& name, bool required)
        : doc_(doc), name_(name) {
        auto it = doc.sections.find(name);
        if (it == doc.sections.end()) {
            if (required) fail(doc, 0, "missing section [" + name + "]");
            return;
        }
        sec_ = &it->second;
        line_ = doc.section_line.at(name);
    }

    bool present() const { return sec_ != nullptr; }
    bool has(const std::string& key) const { return sec_ && sec_->count(key); }
    int line_of(const std::string& key) const { return has(key) ? sec_->at(key).line : line_; }

    const std::string& text(const std::string& key) {
        used_.insert(key);
        if (!has(key)) fail(doc_, line_, "[" + name_ + "] missing key '" + key + "'");
        return sec_->at(key).value;
    }

    std::string text_or(const std::string& key, const std::string& fallback) {
        return has(key) ? text(key) : fallback;
    }

    double real(const std::string& key) {
        const std::string& v = text(key);
        double out = 0.0;
        const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
        if (res.ec != std::errc() || res.ptr != v.data() + v.size() || !std::isfinite(out))
            bad(key, "'" + v + "' is not a real number");
        return out;
    }

    template <typename Int>
    Int integer(const std::string& key) {
        const std::string& v = text(key);
        Int out = 0;
        const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
        if (res.ec != std::errc() || res.ptr != v.data() + v.size())
            bad(key, "'" + v + "' is not an integer");
        return out;
    }

    FinitePmf pmf(const std::string& key) {
        const std::string& v = text(key);
        std::vector<PmfPoint> pts;
        std::istringstream items(v);
        std::string item;
        while (std::getline(items, item, ',')) {
            item = trim(item);
            const auto colon = item.find(':');
            if (colon == std::string::npos) bad(key, "entry '" + item + "' is not point:mass");
            const std::string pt = trim(item.substr(0, colon));
            const std::string ms = trim(item.substr(colon + 1));
            PmfPoint p{0, 0.0};
            auto r1 = std::from_chars(pt.data(), pt.data() + pt.size(), p.point);
            auto r2 = std::from_chars(ms.data(), ms.data() + ms.size(), p.mass);
            if (r1.ec != std::errc() || r1.ptr != pt.data() + pt.size() || r2.ec != std::errc() ||
                r2.ptr != ms.data() + ms.size())
                bad(key, "entry '" + item + "' is not point:mass");
            pts.push_back(p);
        }
        try {
            return FinitePmf(std::move(pts));
        } catch (const Error& e) {
            bad(key, e.what());
        }
    }

    template <typename F>
    auto guarded(const std::string& key, F&& make) {
        try {
            return make();
        } catch (const Error& e) {
            if (e.code() == ErrorCode::Parse) throw;
            bad(key, e.what());
        }
    }

    [[noreturn]] void bad(const std::string& key, const std::string& msg) const {
        fail(doc_, line_of(key), "[" + name_ + "] " + key + ": " + msg);
    }

    void reject_unused() const {
        if (!sec_) return;
        for (const auto& [k, e] : *sec_)
            if (!used_.count(k)) fail(doc_, e.line, "[" + name_ + "] unknown key '" + k + "'");
    }

private:
    const Document& doc_;
    std::string name_;
    const Section* sec_ = nullptr;
    int line_ = 0;
    std::set<std::string> used_;
};

std::variant<InterArrivalDist, CtInterArrival> read_arrival(SectionReader& r) {
    const std::string time = r.text_or("time", "discrete");
    const std::string kind = r.text("kind");
    if (time == "discrete") {
        if (kind == "finite") return InterArrivalDist(r.pmf("pmf"));
        if (kind == "geometric") {
            const double p = r.real("p");
            return r.guarded("p", [&] { return InterArrivalDist(Geometric{p}); });
        }
        if (kind == "deterministic") {
            const int slots = r.integer<int>("slots");
            return r.guarded("slots", [&] { return InterArrivalDist::deterministic(slots); });
        }
        r.bad("kind", "unknown discrete arrival kind '" + kind + "'");
    }
    if (time == "continuous") {
        if (kind == "exponential") {
            const double rate = r.real("rate");
            return r.guarded("rate", [&] { return CtInterArrival(Exponential{rate}); });
        }
        if (kind == "deterministic") {
            const double d = r.real("duration");
            return r.guarded("duration", [&] { return CtInterArrival(DeterministicTime{d}); });
        }
        if (kind == "erlang") {
            const int k = r.integer<int>("stages");
            const double rate = r.real("rate");
            return r.guarded("rate", [&] { return CtInterArrival(Erlang{k, rate}); });
        }
        r.bad("kind", "unknown continuous arrival kind '" + kind + "'");
    }
    r.bad("time", "expected 'discrete' or 'continuous', got '" + time + "'");
}

CapacityDist read_capacity(SectionReader& r) {
    const std::string kind = r.text("kind");
    if (kind == "finite") return r.pmf("pmf");
    if (kind == "geometric") {
        const double p = r.real("p");
        return r.guarded("p", [&] { return CapacityDist(Geometric{p}); });
    }
    r.bad("kind", "unknown capacity kind '" + kind + "'");
}

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string pmf_text(const FinitePmf& f) {
    std::string s;
    for (const auto& pt : f.points()) {
        if (!s.empty()) s += ", ";
        s += std::to_string(pt.point) + ":" + num(pt.mass);
    }
    return s;
}

}  // namespace

QueueModel ModelSpec::discrete_model() const {
    if (is_continuous())
        throw Error(ErrorCode::Parse,
                    "arrival kind mismatch: spec declares a continuous arrival law; use ct-solve");
    return build_model(std::get<InterArrivalDist>(arrival), batch, mu, capacity);
}

CtModel ModelSpec::ct_model() const {
    if (!is_continuous())
        throw Error(ErrorCode::Parse,
                    "arrival kind mismatch: ct-solve needs '[arrival] time = continuous'");
    return build_ct_model(std::get<CtInterArrival>(arrival), batch, mu, capacity);
}

ModelSpec parse_spec(std::string_view text, std::string_view origin) {
    const Document doc = tokenize(text, origin);

    SectionReader arrival(doc, "arrival", true);
    SectionReader batch(doc, "batch", true);
    SectionReader service(doc, "service", true);
    SectionReader capacity(doc, "capacity", true);
    SectionReader output(doc, "output", false);
    SectionReader sim(doc, "simulation", false);

    auto arr = read_arrival(arrival);
    FinitePmf g = batch.pmf("pmf");
    const double mu = service.real("mu");
    CapacityDist y = read_capacity(capacity);
    ModelSpec spec{std::move(arr), std::move(g), mu, std::move(y), {}, {}, {}, {}, {}};

    if (output.has("n_max")) {
        spec.n_max = output.integer<int>("n_max");
        if (*spec.n_max < 0) output.bad("n_max", "must be >= 0");
    }
    if (sim.has("slots")) spec.slots = sim.integer<std::uint64_t>("slots");
    if (sim.has("seed")) spec.seed = sim.integer<std::uint64_t>("seed");
    if (sim.has("warmup")) spec.warmup = sim.integer<std::uint64_t>("warmup");
    if (sim.has("histogram_cap")) {
        spec.histogram_cap = sim.integer<int>("histogram_cap");
        if (*spec.histogram_cap < 1) sim.bad("histogram_cap", "must be >= 1");
    }

    for (const SectionReader* r : {&arrival, &batch, &service, &capacity, &output, &sim})
        r->reject_unused();
    return spec;
}

ModelSpec load_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Parse, path + ": cannot open spec file");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_spec(buf.str(), path);
}

std::string echo_spec(const ModelSpec& spec) {
    std::ostringstream os;
    os << "[arrival]\n";
    if (const auto* d = std::get_if<InterArrivalDist>(&spec.arrival)) {
        os << "time = discrete\n";
        if (const auto* f = std::get_if<FinitePmf>(&d->law())) {
            if (f->points().size() == 1)
                os << "kind = deterministic\nslots = " << f->max_support() << "\n";
            else
                os << "kind = finite\npmf = " << pmf_text(*f) << "\n";
        } else {
            os << "kind = geometric\np = " << num(std::get<Geometric>(d->law()).p) << "\n";
        }
    } else {
        const auto& law = std::get<CtInterArrival>(spec.arrival).law();
        os << "time = continuous\n";
        if (const auto* e = std::get_if<Exponential>(&law))
            os << "kind = exponential\nrate = " << num(e->rate) << "\n";
        else if (const auto* t = std::get_if<DeterministicTime>(&law))
            os << "kind = deterministic\nduration = " << num(t->duration) << "\n";
        else {
            const auto& er = std::get<Erlang>(law);
            os << "kind = erlang\nstages = " << er.stages << "\nrate = " << num(er.rate) << "\n";
        }
    }
    os << "\n[batch]\npmf = " << pmf_text(spec.batch) << "\n";
    os << "\n[service]\nmu = " << num(spec.mu) << "\n";
    os << "\n[capacity]\n";
    if (const auto* f = std::get_if<FinitePmf>(&spec.capacity.law()))
        os << "kind = finite\npmf = " << pmf_text(*f) << "\n";
    else
        os << "kind = geometric\np = " << num(std::get<Geometric>(spec.capacity.law()).p) << "\n";
    if (spec.n_max) os << "\n[output]\nn_max = " << *spec.n_max << "\n";
    if (spec.slots || spec.seed || spec.warmup || spec.histogram_cap) {
        os << "\n[simulation]\n";
        if (spec.slots) os << "slots = " << *spec.slots << "\n";
        if (spec.seed) os << "seed = " << *spec.seed << "\n";
        if (spec.warmup) os << "warmup = " << *spec.warmup << "\n";
        if (spec.histogram_cap) os << "histogram_cap = " << *spec.histogram_cap << "\n";
    }
    return os.str();
}

}  // namespace batchq
