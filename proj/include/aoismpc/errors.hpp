#pragma once

#include <stdexcept>
#include <string>

namespace aoismpc {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
public:
    DimensionMismatch(std::string field, std::string expected, std::string actual)
        : Error("dimension mismatch in " + field + ": expected " + expected + ", got " + actual),
          field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

class NotPsd : public Error {
public:
    NotPsd(std::string matrix, double eigenvalue)
        : Error("matrix " + matrix + " is not positive semidefinite (eigenvalue " +
                std::to_string(eigenvalue) + ")"),
          matrix_(std::move(matrix)), eigenvalue_(eigenvalue) {}
    const std::string& matrix() const { return matrix_; }
    double eigenvalue() const { return eigenvalue_; }

private:
    std::string matrix_;
    double eigenvalue_;
};

class RiskOutOfRange : public Error {
public:
    using Error::Error;
};

class InvalidProbability : public Error {
public:
    using Error::Error;
};

class InvalidChain : public Error {
public:
    using Error::Error;
};

/// The running product of applicability probabilities falls below delta_x at step k.
class InfeasibleRiskChain : public Error {
public:
    InfeasibleRiskChain(int k, double product, double delta_x)
        : Error("risk chain infeasible at k=" + std::to_string(k) + ": product " +
                std::to_string(product) + " vs delta_x " + std::to_string(delta_x)),
          k_(k) {}
    int step() const { return k_; }

private:
    int k_;
};

class HorizonTooLarge : public Error {
public:
    using Error::Error;
};

class SolverInfeasible : public Error {
public:
    SolverInfeasible(std::string block, std::string family)
        : Error("SDP infeasible; most violated block " + block + " (family " + family + ")"),
          block_(std::move(block)), family_(std::move(family)) {}
    const std::string& block() const { return block_; }
    const std::string& family() const { return family_; }

private:
    std::string block_;
    std::string family_;
};

class SolverNumericalFailure : public Error {
public:
    using Error::Error;
};

class RankDeficientE : public Error {
public:
    using Error::Error;
};

class ReconstructionResidual : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace aoismpc
