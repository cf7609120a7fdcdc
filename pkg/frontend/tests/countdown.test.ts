import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { formatRemaining, startCountdown } from "../src/countdown.js";

describe("countdown", () => {
  beforeEach(() => {
    vi.useFakeTimers();
    vi.setSystemTime(new Date("2025-06-01T08:00:00Z"));
  });

  afterEach(() => {
    vi.useRealTimers();
  });

  it("ticks down and fires onExpired exactly once", () => {
    const onTick = vi.fn();
    const onExpired = vi.fn();
    startCountdown({ deadlineMs: Date.now() + 3_000, onTick, onExpired });

    expect(onTick).toHaveBeenLastCalledWith(3);
    vi.advanceTimersByTime(1_000);
    expect(onTick).toHaveBeenLastCalledWith(2);
    vi.advanceTimersByTime(5_000);
    expect(onExpired).toHaveBeenCalledTimes(1);
    vi.advanceTimersByTime(60_000);
    expect(onExpired).toHaveBeenCalledTimes(1);
  });

  it("a deadline already in the past expires on the first tick", () => {
    const onExpired = vi.fn();
    startCountdown({ deadlineMs: Date.now() - 1, onTick: vi.fn(), onExpired });
    expect(onExpired).toHaveBeenCalledTimes(1);
  });

  it("stop() silences both ticking and expiry", () => {
    const onTick = vi.fn();
    const onExpired = vi.fn();
    const handle = startCountdown({ deadlineMs: Date.now() + 2_000, onTick, onExpired });
    handle.stop();
    const ticksAtStop = onTick.mock.calls.length;
    vi.advanceTimersByTime(10_000);
    expect(onTick.mock.calls.length).toBe(ticksAtStop);
    expect(onExpired).not.toHaveBeenCalled();
  });

  it("respects an injected clock", () => {
    let fakeNow = 1_000_000;
    const onExpired = vi.fn();
    startCountdown({
      deadlineMs: fakeNow + 1_500,
      nowMs: () => fakeNow,
      onTick: vi.fn(),
      onExpired,
    });
    fakeNow += 2_000;
    vi.advanceTimersByTime(1_000);
    expect(onExpired).toHaveBeenCalledTimes(1);
  });
});

describe("formatRemaining", () => {
  it("renders minutes:seconds with padding", () => {
    expect(formatRemaining(0)).toBe("0:00");
    expect(formatRemaining(59)).toBe("0:59");
    expect(formatRemaining(60)).toBe("1:00");
    expect(formatRemaining(3_599)).toBe("59:59");
    expect(formatRemaining(3_600)).toBe("60:00");
  });
});
