"""flowsieve: feature selection and tree-ensemble efficiency benchmarking
for labeled network-flow datasets.

The pipeline scores features with five selection methods (information gain,
chi-squared, recursive feature elimination, mean absolute deviation,
dispersion ratio), combines them into a single normalized ranking, selects
the top-k feature set, and benchmarks native tree-ensemble models trained
on the full versus the reduced feature set.
"""

__version__ = "0.1.0"
