#include <dissect/instance.hpp>

#include <algorithm>
#include <bit>
#include <sstream>
#include <stdexcept>

namespace dissect {

SolutionVector SolutionVector::from_mask(int n, uint64_t mask) {
    if (n < 0 || n > 64) throw std::invalid_argument("from_mask needs 0 <= n <= 64");
    if (n < 64 && (mask >> n) != 0) throw std::invalid_argument("mask has bits beyond n");
    SolutionVector x(n);
    x.lo_ = mask;
    return x;
}

int SolutionVector::count() const {
    int c = std::popcount(lo_);
    for (uint64_t w : hi_) c += std::popcount(w);
    return c;
}

std::string SolutionVector::str() const {
    std::string s(size_t(n_), '0');
    for (int i = 0; i < n_; i++)
        if (get(i)) s[size_t(i)] = '1';
    return s;
}

std::optional<SolutionVector> SolutionVector::parse(const std::string& s) {
    SolutionVector x(int(s.size()));
    for (size_t i = 0; i < s.size(); i++) {
        if (s[i] == '1') x.set(int(i), true);
        else if (s[i] != '0') return std::nullopt;
    }
    return x;
}

SolutionVector SolutionVector::concat(const SolutionVector& a, const SolutionVector& b) {
    SolutionVector r(a.n_ + b.n_);
    for (int i = 0; i < a.n_; i++)
        if (a.get(i)) r.set(i, true);
    for (int i = 0; i < b.n_; i++)
        if (b.get(i)) r.set(a.n_ + i, true);
    return r;
}

bool SolutionVector::operator<(const SolutionVector& o) const {
    if (n_ != o.n_) return n_ < o.n_;
    // string-lexicographic: item 0 is the most significant position
    int words = n_ <= 64 ? 1 : 1 + int(hi_.size());
    for (int w = 0; w < words; w++) {
        uint64_t a = word(size_t(w)), b = o.word(size_t(w));
        if (a == b) continue;
        // differing bit with the lowest index decides
        uint64_t diff = a ^ b;
        uint64_t first = diff & (~diff + 1);
        return (b & first) != 0;
    }
    return false;
}

Int selected_sum(const std::vector<Int>& items, const SolutionVector& x) {
    if (int(items.size()) != x.size()) throw std::invalid_argument("selected_sum: length mismatch");
    Int s = 0;
    for (int i = 0; i < x.size(); i++)
        if (x.get(i)) s += items[i];
    return s;
}

std::string render_instance(const Instance& inst, const std::optional<SolutionVector>& witness) {
    std::ostringstream out;
    out << inst.n() << "\n";
    for (int i = 0; i < inst.n(); i++) {
        if (i) out << ' ';
        out << inst.items[size_t(i)].get_str();
    }
    out << "\n" << inst.target.get_str() << "\n";
    if (witness) out << "# witness " << witness->str() << "\n";
    return out.str();
}

namespace {

// strict decimal: no sign, no leading zeros except the literal "0"
bool parse_decimal(const std::string& tok, Int& out) {
    if (tok.empty()) return false;
    for (char c : tok)
        if (c < '0' || c > '9') return false;
    if (tok.size() > 1 && tok[0] == '0') return false;
    out = Int(tok, 10);
    return true;
}

}  // namespace

ParsedInstance parse_instance(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<std::string> body;
    std::optional<SolutionVector> witness;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty() && line[0] == '#') {
            std::istringstream c(line.substr(1));
            std::string key, bits;
            if (c >> key >> bits && key == "witness") {
                witness = SolutionVector::parse(bits);
                if (!witness) throw std::invalid_argument("bad witness bits: " + bits);
            }
            continue;  // unknown comments are ignored
        }
        body.push_back(line);
    }
    if (body.size() != 3) throw std::invalid_argument("expected exactly 3 data lines, got " + std::to_string(body.size()));

    Int n_val;
    if (!parse_decimal(body[0], n_val) || !n_val.fits_sint_p())
        throw std::invalid_argument("bad item count: " + body[0]);
    int n = int(n_val.get_si());

    ParsedInstance r;
    std::istringstream items(body[1]);
    std::string tok;
    while (items >> tok) {
        Int a;
        if (!parse_decimal(tok, a)) throw std::invalid_argument("bad item: " + tok);
        r.inst.items.push_back(a);
    }
    if (r.inst.n() != n)
        throw std::invalid_argument("item count mismatch: header says " + std::to_string(n) +
                                    ", found " + std::to_string(r.inst.n()));
    if (!parse_decimal(body[2], r.inst.target)) throw std::invalid_argument("bad target: " + body[2]);
    if (witness && witness->size() != n) throw std::invalid_argument("witness length mismatch");
    r.witness = witness;
    return r;
}

std::optional<InstanceKind> instance_kind_from(const std::string& s) {
    if (s == "uniform") return InstanceKind::uniform;
    if (s == "planted") return InstanceKind::planted;
    if (s == "all-equal") return InstanceKind::all_equal;
    if (s == "parity-no") return InstanceKind::parity_no;
    return std::nullopt;
}

std::string to_string(InstanceKind k) {
    switch (k) {
        case InstanceKind::uniform: return "uniform";
        case InstanceKind::planted: return "planted";
        case InstanceKind::all_equal: return "all-equal";
        case InstanceKind::parity_no: return "parity-no";
    }
    return "?";
}

GeneratedInstance generate_instance(InstanceKind kind, int n, int bits, SplitRng& rng) {
    if (n < 0) throw std::invalid_argument("negative n");
    if (bits < 1) throw std::invalid_argument("bits must be >= 1");
    GeneratedInstance g;
    Int lim = pow2(bits);
    switch (kind) {
        case InstanceKind::uniform: {
            Int sum = 0;
            for (int i = 0; i < n; i++) {
                g.inst.items.push_back(rand_below(rng, lim));
                sum += g.inst.items.back();
            }
            g.inst.target = rand_below(rng, sum + 1);
            break;
        }
        case InstanceKind::planted: {
            for (int i = 0; i < n; i++)
                g.inst.items.push_back(rand_below(rng, lim));
            SolutionVector w(n);
            int picked = 0;
            while (picked == 0 && n > 0) {
                for (int i = 0; i < n; i++) {
                    bool b = rng.next_below(2) == 1;
                    w.set(i, b);
                    picked += b;
                }
            }
            g.inst.target = selected_sum(g.inst.items, w);
            g.witness = w;
            break;
        }
        case InstanceKind::all_equal: {
            g.inst.items.assign(size_t(n), Int(1));
            g.inst.target = n / 2;
            break;
        }
        case InstanceKind::parity_no: {
            Int sum = 0;
            for (int i = 0; i < n; i++) {
                g.inst.items.push_back(2 * rand_below(rng, lim / 2 + 1));
                sum += g.inst.items.back();
            }
            g.inst.target = 2 * rand_below(rng, sum / 2 + 1) + 1;
            break;
        }
    }
    return g;
}

}  // namespace dissect
