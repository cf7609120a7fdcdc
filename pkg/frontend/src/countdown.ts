/** Deadline countdown driven by the server's clock, not the browser's.
 *
 * The sitting response carries opened_at and deadline in server time; the
 * difference between opened_at and the local clock at render time gives the
 * skew, so a wrong local clock cannot stretch or shrink the exam.
 */

export interface CountdownOptions {
  deadlineMs: number;
  nowMs?: () => number;
  tickMs?: number;
  onTick: (remainingSeconds: number) => void;
  onExpired: () => void;
}

export interface CountdownHandle {
  stop: () => void;
}

export function startCountdown(options: CountdownOptions): CountdownHandle {
  const nowMs = options.nowMs ?? Date.now;
  const tickMs = options.tickMs ?? 1000;
  let expired = false;
  let timer: ReturnType<typeof setInterval> | null = null;

  const tick = () => {
    const remaining = Math.max(0, Math.ceil((options.deadlineMs - nowMs()) / 1000));
    options.onTick(remaining);
    if (remaining <= 0 && !expired) {
      expired = true; // onExpired must fire at most once
      if (timer !== null) clearInterval(timer);
      timer = null;
      options.onExpired();
    }
  };

  timer = setInterval(tick, tickMs);
  tick();
  return {
    stop: () => {
      if (timer !== null) clearInterval(timer);
      timer = null;
      expired = true;
    },
  };
}

export function formatRemaining(totalSeconds: number): string {
  const minutes = Math.floor(totalSeconds / 60);
  const seconds = totalSeconds % 60;
  return `${minutes}:${String(seconds).padStart(2, "0")}`;
}
