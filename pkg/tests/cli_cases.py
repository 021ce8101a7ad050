"""One small invocation per subcommand, shared by the CLI tests and the determinism criterion."""

CASES = {
    "sieve": ["sieve", "--start", "1", "--len", "200"],
    "variance": ["variance", "--X", "3000", "--h", "10", "--policy", "random", "--count", "500", "--seed", "3"],
    "scan-h": ["scan-h", "--X", "5000", "--h", "1,10,100"],
    "meansq": ["meansq", "--n-start", "100", "--n-end", "400", "--T1", "0", "--T2", "500"],
    "mvt-check": ["mvt-check", "--N", "50", "--T", "2000", "--coeffs", "random", "--seed", "11"],
    "primesum-scan": ["primesum-scan", "--P", "100", "--X", "10000", "--points", "8"],
    "lambda-scan": ["lambda-scan", "--X", "1000", "--t", "10,100,1000", "--ladder", "500,1000,2000"],
    "plancherel": ["plancherel", "--X", "500", "--h", "10"],
    "perron-check": ["perron-check", "--y", "2", "--kappa", "0.5", "--T", "10"],
    "decompose-check": ["decompose-check", "--X", "200", "--h", "5"],
    "rearrange-check": ["rearrange-check", "--X", "100", "--h", "5"],
    "split-check": ["split-check", "--X", "100", "--h", "7"],
    "psi": ["psi", "--x", "100000", "--y", "97"],
    "rho": ["rho", "--u", "1.5,2,3,4.25"],
    "threshold": ["threshold", "--X", "1e8"],
    "density-check": ["density-check", "--X", "10000", "--h", "10"],
    "corollary-bound": ["corollary-bound", "--X", "1e8", "--h", "100"],
}
