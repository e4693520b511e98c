import { describe, expect, test } from "vitest";

import { Frac } from "../src/fraction.js";

describe("parsing and canonical form", () => {
  test("parses integers and fractions from the wire format", () => {
    expect(Frac.parse("15/13").toString()).toBe("15/13");
    expect(Frac.parse("1").toString()).toBe("1");
    expect(Frac.parse("0").toString()).toBe("0");
    expect(Frac.parse("-3/4").toString()).toBe("-3/4");
  });

  test("normalizes to lowest terms with positive denominator", () => {
    expect(new Frac(6n, 4n).toString()).toBe("3/2");
    expect(new Frac(3n, -2n).toString()).toBe("-3/2");
    expect(new Frac(0n, 7n).toString()).toBe("0");
  });

  test("rejects malformed text and zero denominators", () => {
    expect(() => Frac.parse("1.5")).toThrow(RangeError);
    expect(() => Frac.parse("a/b")).toThrow(RangeError);
    expect(() => Frac.parse("1/0")).toThrow(RangeError);
    expect(() => new Frac(1n, 0n)).toThrow(RangeError);
  });
});

describe("arithmetic", () => {
  test("weighted mean of (2,1,1) weights over scores (2,0,1) is 5/4", () => {
    const num = new Frac(2n).mul(Frac.fromInt(2))
      .add(new Frac(1n).mul(Frac.fromInt(0)))
      .add(new Frac(1n).mul(Frac.fromInt(1)));
    const den = new Frac(2n).add(new Frac(1n)).add(new Frac(1n));
    expect(num.div(den).toString()).toBe("5/4");
  });

  test("add, sub, mul, div stay exact", () => {
    const a = Frac.parse("1/3");
    const b = Frac.parse("1/6");
    expect(a.add(b).toString()).toBe("1/2");
    expect(a.sub(b).toString()).toBe("1/6");
    expect(a.mul(b).toString()).toBe("1/18");
    expect(a.div(b).toString()).toBe("2");
  });

  test("equality is by value", () => {
    expect(Frac.parse("2/4").eq(Frac.parse("1/2"))).toBe(true);
    expect(Frac.parse("1/3").eq(Frac.parse("2/3"))).toBe(false);
  });

  test("division by zero is rejected", () => {
    expect(() => Frac.parse("1").div(Frac.parse("0"))).toThrow(RangeError);
  });
});

describe("two-decimal display, round half up", () => {
  const cases: [string, string][] = [
    ["5/4", "1.25"],
    ["1/200", "0.01"],
    ["3/200", "0.02"],
    ["1/3", "0.33"],
    ["2/3", "0.67"],
    ["0", "0.00"],
    ["2", "2.00"],
    ["199/100", "1.99"],
    ["15/13", "1.15"],
  ];
  for (const [input, want] of cases) {
    test(`${input} renders as ${want}`, () => {
      expect(Frac.parse(input).toFixedHalfUp(2)).toBe(want);
    });
  }

  test("half-way values round up at any precision", () => {
    expect(Frac.parse("1/2").toFixedHalfUp(0)).toBe("1");
    expect(Frac.parse("5/100").toFixedHalfUp(1)).toBe("0.1");
  });

  test("rejects negative precision", () => {
    expect(() => Frac.parse("1").toFixedHalfUp(-1)).toThrow(RangeError);
  });
});
