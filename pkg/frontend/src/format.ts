// Display rounding mirrors the CLI: one decimal for the percentage, two for
// the cost. Formatting is the only numeric transformation the console does.

export function formatPercentage(percentage: number): string {
  return `${percentage.toFixed(1)}%`;
}

export function formatCost(cost: number): string {
  return cost.toFixed(2);
}

export function formatSpread(spread: number): string {
  return spread.toFixed(3);
}

export function resultMessage(percentage: number, cost: number): string {
  return `Staff training required: ${formatPercentage(percentage)} — estimated cost ${formatCost(cost)}`;
}
