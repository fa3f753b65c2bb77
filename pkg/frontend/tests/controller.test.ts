import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api";
import { Host, ReviewController } from "../src/controller";
import { FakeService } from "./fixtures";

class FakeHost implements Host {
  queue = "";
  document = "";
  banner = "";
  setQueue(html: string) {
    this.queue = html;
  }
  setDocument(html: string) {
    this.document = html;
  }
  setBanner(html: string) {
    this.banner = html;
  }
}

function setup(now?: () => number) {
  const service = new FakeService();
  const host = new FakeHost();
  const controller = new ReviewController(new ApiClient("", service.fetch), host, now);
  return { service, host, controller };
}

describe("ReviewController", () => {
  it("renders pending tasks into the queue region", async () => {
    const { host, controller } = setup();
    await controller.refreshQueue();
    expect(host.queue).toContain("tyrell-01");
    expect(host.queue).toContain("pending");
  });

  it("opening a document renders both panes with highlighting", async () => {
    const { host, controller } = setup();
    await controller.open("tyrell-01");
    expect(host.document).toContain("markdown-pane");
    expect(host.document).toContain("low-confidence");
  });

  it("a correction updates the field pane and shows the inheritance notice", async () => {
    const { host, controller } = setup();
    await controller.open("tyrell-01");
    await controller.correct("total_amount", "12000 EUR");
    expect(host.document).toContain("12000 EUR");
    expect(host.document).not.toContain("<ins>12200 EUR</ins>");
    expect(host.banner).toContain("1 pending document updated");
    // corrected field is now at confidence 1.00 and no longer highlighted
    expect(host.document).toContain("1.00");
  });

  it("confirm removes the task from the queue and reports the review time", async () => {
    let t = 1_000;
    const { service, host, controller } = setup(() => t);
    await controller.open("tyrell-01");
    t = 31_000; // 30 s on the review timer
    await controller.confirm();
    expect(host.queue).toContain("Review queue is empty");
    expect(host.document).toBe("");
    const confirmCall = service.calls.find((c) => c.url.endsWith("/confirm"))!;
    expect(confirmCall.body).toEqual({ review_seconds: 30 });
  });

  it("a 409 conflict surfaces as a banner without destroying the view", async () => {
    const { service, host, controller } = setup();
    await controller.open("tyrell-01");
    const before = host.document;
    service.resolved = true; // someone else resolved the task meanwhile
    await controller.correct("total_amount", "1 EUR");
    expect(host.banner).toContain("task already resolved");
    expect(host.banner).toContain("error");
    expect(host.document).toBe(before);
  });

  it("reload after an action reproduces the server view (statelessness)", async () => {
    const { service, host, controller } = setup();
    await controller.open("tyrell-01");
    await controller.correct("total_amount", "12000 EUR");
    const afterCorrection = host.document;
    const fresh = new FakeHost();
    const again = new ReviewController(new ApiClient("", service.fetch), fresh);
    await again.open("tyrell-01");
    expect(fresh.document).toBe(afterCorrection);
  });
});
