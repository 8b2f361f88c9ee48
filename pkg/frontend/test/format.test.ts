import { describe, expect, it } from "vitest";

import { formatCost, formatPercentage, formatSpread, resultMessage } from "../src/format.js";

describe("display rounding", () => {
  it("renders one decimal percentages", () => {
    expect(formatPercentage(30)).toBe("30.0%");
    expect(formatPercentage(33.3333333)).toBe("33.3%");
    expect(formatPercentage(0)).toBe("0.0%");
  });

  it("renders two decimal costs", () => {
    expect(formatCost(30000)).toBe("30000.00");
    expect(formatCost(12345.678)).toBe("12345.68");
    expect(formatCost(0)).toBe("0.00");
  });

  it("renders three decimal spreads", () => {
    expect(formatSpread(0)).toBe("0.000");
    expect(formatSpread(0.19999999)).toBe("0.200");
  });

  it("is deterministic for equal inputs", () => {
    expect(resultMessage(30, 30000)).toBe(resultMessage(30, 30000));
    expect(resultMessage(30, 30000)).toBe(
      "Staff training required: 30.0% — estimated cost 30000.00",
    );
  });
});
