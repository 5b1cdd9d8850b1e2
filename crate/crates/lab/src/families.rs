//! Static listing printed by `nevlab list-families`. The text is fixed so
//! the output is byte-stable.

pub const LISTING: &str = "\
function families (key \"family\")
  rational          numerator: [c], denominator: [c] = [1]      ascending coefficients
  rational-roots    lead: c, zeros: [{at: c, mult: n}], poles: [{at: c, mult: n}]
  exp-poly          terms: [{coef: c, freq: c}]                 sum of coef * exp(freq z)
  jacobi-sn         k: real in (0, 1)                           modulus
  constant          value: c
  identity                                                      f(z) = z
  affine            inner: function, a: c, b: c                 inner(a z + b)
  combine           op: add|sub|mul|div, lhs: function, rhs: function
  apply             operator: operator, inner: function         L(inner)
  opaque            inner: function                             hides closed-form divisor data

operator nodes (key \"op\")
  identity
  derivative        order: n = 1, inner: operator = identity
  shift             c: c, inner: operator = identity            h(z + c)
  q-scale           q: c, inner: operator = identity            h(q z)
  sum               terms: [{coef: c | function, operator: operator}]
  difference                                                    h(z + 1) - h(z)
  central-second-difference                                     h(z + 1) - 2 h(z) + h(z - 1)
  compose           outer: operator, inner: operator
  power             base: operator, n: n

tasks
  characteristic    m, N, T per radius and target counting functions
  jensen            Jensen identity residual per radius
  smt21             second main theorem rows for (f, g, targets)
  smt-linear        second main theorem with g = L(f), remainder and log-derivative ratios
  deficiency        delta, Valiron deficiency and theta for targets and infinity
  picard            exceptional candidates of L against the counting threshold
  synthetic-valiron Valiron bound check on a synthetic divisor model (needs synthetic: {p, delta})

c is a number or [re, im]; n is a nonnegative integer.
";
