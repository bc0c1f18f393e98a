#include "compca/common.hpp"

namespace compca {

double penalty_exponent(Penalty q)
{
    switch(q)
    {
        case Penalty::L0: return 0.0;
        case Penalty::LHalf: return 0.5;
        case Penalty::LTwoThirds: return 2.0 / 3.0;
        case Penalty::L1: return 1.0;
    }
    return 1.0;
}

Penalty parse_penalty(std::string_view token)
{
    if(token == "0")
        return Penalty::L0;
    if(token == "1/2" || token == "0.5")
        return Penalty::LHalf;
    if(token == "2/3")
        return Penalty::LTwoThirds;
    if(token == "1")
        return Penalty::L1;
    throw InputError("q must be one of 0, 1/2, 2/3, 1 (got '" + std::string(token) + "')");
}

std::string penalty_token(Penalty q)
{
    switch(q)
    {
        case Penalty::L0: return "0";
        case Penalty::LHalf: return "1/2";
        case Penalty::LTwoThirds: return "2/3";
        case Penalty::L1: return "1";
    }
    return "1";
}

SparsityMode parse_mode(std::string_view token)
{
    if(token == "row")
        return SparsityMode::Row;
    if(token == "column")
        return SparsityMode::Column;
    throw InputError("sparsity mode must be 'row' or 'column' (got '" + std::string(token) + "')");
}

std::string mode_token(SparsityMode mode)
{
    return mode == SparsityMode::Row ? "row" : "column";
}

}  // namespace compca
